"""Path-compressed binary radix trie over fixed-width integer prefixes.

One trie instance indexes a single address family (width 32 or 128).
Prefixes are (network_int, prefix_len) with host bits zero; each stored
prefix carries a set of payload items.  Lookups return the payloads of
every stored prefix covering the queried address or prefix, not just the
longest match.
"""

from __future__ import annotations

from typing import Any, Iterator


class _Node:
    # shift = width - plen and key = net >> shift are precomputed so the
    # lookup loop does a single shift-and-compare per node.
    __slots__ = ("net", "plen", "shift", "key", "items", "zero", "one")

    def __init__(self, net: int, plen: int, width: int):
        self.net = net
        self.plen = plen
        self.shift = width - plen
        self.key = net >> self.shift
        self.items: set[Any] | None = None
        self.zero: _Node | None = None
        self.one: _Node | None = None


class RadixTrie:
    def __init__(self, width: int):
        if width not in (32, 128):
            raise ValueError("width must be 32 or 128")
        self.width = width
        self._root = _Node(0, 0, width)
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def insert(self, net: int, plen: int, item: Any) -> None:
        if not 0 <= plen <= self.width:
            raise ValueError(f"prefix length {plen} out of range")
        w = self.width
        node = self._root
        while True:
            if node.plen == plen and node.net == net:
                if node.items is None:
                    node.items = set()
                before = len(node.items)
                node.items.add(item)
                self._size += len(node.items) - before
                return
            bit = (net >> (w - 1 - node.plen)) & 1
            child = node.one if bit else node.zero
            if child is None:
                leaf = _Node(net, plen, w)
                leaf.items = {item}
                self._size += 1
                if bit:
                    node.one = leaf
                else:
                    node.zero = leaf
                return
            diff = child.net ^ net
            common = min(child.plen, plen) if diff == 0 else min(
                child.plen, plen, w - diff.bit_length()
            )
            if common == child.plen:
                node = child
                continue
            # Fork below `node`: either the new prefix sits above the child,
            # or both hang off a fresh internal node at the divergence point.
            if common == plen:
                mid = _Node(net, plen, w)
                mid.items = {item}
                self._size += 1
                self._attach(mid, child, w)
            else:
                # common >= node.plen + 1 here: both prefixes share the branch bit.
                mid = _Node(net >> (w - common) << (w - common), common, w)
                leaf = _Node(net, plen, w)
                leaf.items = {item}
                self._size += 1
                self._attach(mid, child, w)
                self._attach(mid, leaf, w)
            if bit:
                node.one = mid
            else:
                node.zero = mid
            return

    @staticmethod
    def _attach(parent: _Node, child: _Node, width: int) -> None:
        if (child.net >> (width - 1 - parent.plen)) & 1:
            parent.one = child
        else:
            parent.zero = child

    def covering_of_address(self, addr: int) -> list[Any]:
        """All payloads whose prefix contains the address, root-down order."""
        out: list[Any] = []
        node: _Node | None = self._root
        while node is not None:
            shift = node.shift
            if (addr >> shift) != node.key:
                break
            items = node.items
            if items:
                out.extend(items)
            if shift == 0:
                break
            node = node.one if (addr >> (shift - 1)) & 1 else node.zero
        return out

    def covering_of_prefix(self, net: int, plen: int) -> list[Any]:
        """All payloads whose prefix contains the queried prefix entirely."""
        w = self.width
        out: list[Any] = []
        node: _Node | None = self._root
        while node is not None and node.plen <= plen:
            shift = node.shift
            if (net >> shift) != node.key:
                break
            if node.items:
                out.extend(node.items)
            if node.plen == plen:
                break
            node = node.one if (net >> (shift - 1)) & 1 else node.zero
        return out

    def iter_items(self) -> Iterator[Any]:
        stack = [self._root]
        while stack:
            node = stack.pop()
            if node.items:
                yield from node.items
            if node.zero is not None:
                stack.append(node.zero)
            if node.one is not None:
                stack.append(node.one)

import pytest

from e2e_support import e2e_config
from rpkiaudit.cli import run_stage


@pytest.fixture(scope="session")
def e2e_output(tmp_path_factory):
    """One full pipeline run over the committed synthetic fixture."""
    out = tmp_path_factory.mktemp("e2e_run")
    assert run_stage("all", e2e_config(out)) == 0
    return out

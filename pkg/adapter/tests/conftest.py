"""Session fixture: a corpus built once through the corpus CLI.

The adapter is exercised the way a user would run it, against real
pipeline output files, never by importing the corpus library.
"""

from pathlib import Path

import pytest

from adapter_testlib import CORPUS_EXPORT, CORPUS_SRC, run_cli


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory) -> Path:
    """samples.jsonl + split.json produced by the corpus pipeline CLI."""
    workdir = tmp_path_factory.mktemp("corpus")
    proc = run_cli(
        "binsum",
        "pipeline",
        "--src",
        str(CORPUS_SRC),
        "--export",
        str(CORPUS_EXPORT),
        "--workdir",
        str(workdir),
        "--seed",
        "7",
    )
    assert proc.returncode == 0, proc.stderr
    assert (workdir / "samples.jsonl").exists()
    assert (workdir / "split.json").exists()
    return workdir

"""Shared test helpers: CLI runner and tiny interchange-file builders."""

from __future__ import annotations

import json
import subprocess
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[2]
CORPUS_SRC = REPO_ROOT / "tests" / "fixtures" / "corpus" / "src"
CORPUS_EXPORT = REPO_ROOT / "tests" / "fixtures" / "corpus" / "decompiled.jsonl"


def run_cli(*argv: str, cwd: Path | None = None) -> subprocess.CompletedProcess:
    return subprocess.run(
        list(argv), cwd=cwd, capture_output=True, text=True, check=False
    )


def write_jsonl(path: Path, rows: list[dict]) -> Path:
    path.write_text(
        "".join(json.dumps(row, ensure_ascii=False) + "\n" for row in rows),
        encoding="utf-8",
    )
    return path


def mk_row(
    sample_id: str,
    *,
    variant: str = "decompiled",
    code: str = "void FUN_0(void) { return; }",
    summary: str = "Does nothing and returns.",
) -> dict:
    return {
        "id": sample_id,
        "project": "proj",
        "binary": "bin.elf",
        "name": "fn",
        "variant": variant,
        "code": code,
        "summary": summary,
        "opt_level": "O2",
        "source_file": "src/fn.c",
    }


def mk_split(train: list[str], valid: list[str], test: list[str]) -> dict:
    return {
        "seed": 7,
        "ratios": [0.8, 0.1, 0.1],
        "train": train,
        "valid": valid,
        "test": test,
        "train_projects": ["proj"],
        "valid_projects": [],
        "test_projects": [],
        "pinned_valid": [],
        "pinned_test": [],
    }

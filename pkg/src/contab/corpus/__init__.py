"""Bundled corpus of small first-order problems in TPTP syntax.

Files ending in .p are standalone problems; .ax files only exist to be
pulled in by include directives.
"""

from __future__ import annotations

from pathlib import Path
from typing import List


def corpus_dir() -> Path:
    return Path(__file__).resolve().parent


def corpus_problems() -> List[Path]:
    return sorted(corpus_dir().glob("*.p"))

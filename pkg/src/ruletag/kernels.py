"""Kernel selection: compiled extension if available, pure Python otherwise.

Set RULETAG_PURE_PYTHON=1 to force the fallback (useful for benchmarking
and for cross-checking the two implementations).
"""

from __future__ import annotations

import os

from . import _chunks as _py

if os.environ.get("RULETAG_PURE_PYTHON") == "1":
    _impl = _py
    BACKEND = "python"
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _py
        BACKEND = "python"

STOP_TOKENS = _py.STOP_TOKENS

document_chunks = _impl.document_chunks
split_sentences = _impl.split_sentences
sentence_hits = _impl.sentence_hits

# Always-available handles for benchmarks and equivalence tests.
document_chunks_py = _py.document_chunks
try:
    from . import _speedups as _c

    document_chunks_c = _c.document_chunks
except ImportError:
    document_chunks_c = None

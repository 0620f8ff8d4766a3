"""Atomic file writes shared by the engine and the CLI."""

import os
import tempfile


def atomic_write_text(path, text: str) -> None:
    """Write text to path via a same-directory temp file + rename."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise

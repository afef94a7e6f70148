from __future__ import annotations

import csv
import io
import json
import logging
import os
import sys
import tempfile
import time
from collections.abc import Iterable
from contextlib import contextmanager
from pathlib import Path
from typing import Any

from filelock import FileLock

from cgmy_atm.models import TableRow

logger = logging.getLogger(__name__)

CSV_HEADER = ("params", "Y", "t", "numerator", "reference", "ratio", "quad_error", "within_gate")


@contextmanager
def file_lock(path: Path):
    with FileLock(str(path.with_name(path.name + ".lock"))):
        yield


def _replace_with_retry(
    src: str | os.PathLike, dst: str | os.PathLike, retries: int = 5, base_delay: float = 0.05
) -> None:
    for attempt in range(retries):
        try:
            os.replace(src, dst)
            return
        except PermissionError:
            # Windows only: a scanner or reader may hold the target briefly.
            if sys.platform != "win32" or attempt == retries - 1:
                raise
            time.sleep(base_delay * (2**attempt))


def write_text_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with file_lock(path):
        fd, tmp_path = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            os.write(fd, text.encode())
            os.close(fd)
            fd = -1
            _replace_with_retry(tmp_path, path)
        except BaseException:
            if fd >= 0:
                os.close(fd)
            if os.path.exists(tmp_path):
                os.unlink(tmp_path)
            raise
    logger.info("wrote %s (%d bytes)", path, len(text))


def rows_to_csv(rows: Iterable[TableRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(
            [
                row.params_label,
                f"{row.Y:g}",
                f"{row.t:g}",
                f"{row.numerator:.10g}",
                f"{row.reference:.10g}",
                f"{row.ratio:.6g}",
                f"{row.quad_error:.3g}",
                "true" if row.within_gate else "false",
            ]
        )
    return buf.getvalue()


def write_rows_csv(path: Path, rows: Iterable[TableRow]) -> None:
    write_text_atomic(path, rows_to_csv(rows))


def write_json(path: Path, payload: Any) -> None:
    write_text_atomic(path, json.dumps(payload, indent=2) + "\n")

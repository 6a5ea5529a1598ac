import hashlib
import os
import tempfile
from pathlib import Path
from typing import Union

CHUNK_BYTES = 1 << 20


def ensure_dir(p: Path) -> None:
    p.mkdir(parents=True, exist_ok=True)


def atomic_write_bytes(dst: Path, data: bytes) -> None:
    """Write to a temporary file in the target directory, then rename over dst."""
    dst = Path(dst)
    ensure_dir(dst.parent)
    fd, tmp = tempfile.mkstemp(prefix=f".{dst.name}.", suffix='.tmp', dir=str(dst.parent))
    try:
        with os.fdopen(fd, 'wb') as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, dst)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(dst: Path, text: str) -> None:
    atomic_write_bytes(dst, text.encode('utf-8'))


def file_sha256(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as fh:
        for chunk in iter(lambda: fh.read(CHUNK_BYTES), b''):
            digest.update(chunk)
    return digest.hexdigest()

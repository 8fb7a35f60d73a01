"""CSV and JSON artifacts of experiments."""

import dataclasses
import json
import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import numpy as np

import socdyn.config as config
import socdyn.exc as exc

log = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclasses.dataclass(frozen=True)
class Check:
    """Outcome of a declared tolerance check of an experiment.

    :param name: identifier of the check.
    :param value: measured value.
    :param tolerance: declared tolerance the value is compared against.
    :param passed: whether the value meets the tolerance.
    """
    name: str
    value: float
    tolerance: float
    passed: bool

    @classmethod
    def below(cls, name: str, value: float, tolerance: float) -> 'Check':
        return cls(name, float(value), float(tolerance), bool(value < tolerance))

    @classmethod
    def within(cls, name: str, value: float, tolerance: float) -> 'Check':
        """Return a check that |value| ≤ tolerance."""
        return cls(name, float(value), float(tolerance), bool(abs(value) <= tolerance))

    def to_json(self) -> Dict[str, Any]:
        return {'name': self.name, 'value': self.value, 'tolerance': self.tolerance, 'pass': self.passed}


def _to_builtin(obj: Any) -> Any:
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    if dataclasses.is_dataclass(obj):
        return dataclasses.asdict(obj)
    raise TypeError(f'Object of type {type(obj).__qualname__} is not JSON serializable.')


def prepare_output_dir(path: PathLike) -> Path:
    """Create the output directory if needed and confirm that it is writable.

    :raises socdyn.exc.OutputError: if the directory cannot be created or written.
    """
    path = Path(path)
    probe = path / '.socdyn-write-probe'
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe.write_bytes(b'')
        probe.unlink()
    except OSError as error:
        raise exc.OutputError(f'Output directory {path} is not writable: {error}') from error
    log.debug('Output directory %s is writable.', path)
    return path


def write_columns(path: PathLike, columns: Mapping[str, np.ndarray]) -> None:
    """Write equal length columns as CSV with a header row, using 17 significant digits."""
    names = list(columns)
    data = np.column_stack([np.asarray(columns[name], dtype=float) for name in names])
    np.savetxt(path, data, fmt=f'%.{config.CSV_SIGNIFICANT_DIGITS}g', delimiter=',', header=','.join(names),
               comments='')
    log.debug('Wrote %s rows of columns %s to %s.', data.shape[0], names, path)


def write_json(path: PathLike, obj: Any) -> None:
    text = json.dumps(obj, default=_to_builtin, indent=2, sort_keys=True)
    Path(path).write_text(text + '\n')
    log.debug('Wrote JSON to %s.', path)


def source_revision() -> Optional[str]:
    """Return the commit of the git checkout holding this package, or None outside of one."""
    try:
        import git  # Import fails without a git executable.
    except ImportError:
        log.debug('Source revision is unavailable since git cannot be imported.')
        return None
    try:
        repo = git.Repo(Path(__file__).parent, search_parent_directories=True)
        return repo.head.commit.hexsha
    except (ValueError, git.exc.InvalidGitRepositoryError, git.exc.NoSuchPathError):
        return None

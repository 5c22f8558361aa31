"""Run reports, CSV curves and the content-addressed result cache."""

import csv
import dataclasses
import hashlib
import json
import math
import os
import tempfile
import warnings
from pathlib import Path

import numpy as np

SCHEMA_VERSION = "1.0"
CACHE_ENV = "SOLERLAB_CACHE_DIR"


def to_jsonable(obj):
    """Convert numpy, complex and dataclass values into JSON-native structures.

    Complex numbers become ``{"re": .., "im": ..}``; non-finite floats are
    kept (Python's json writes them as NaN/Infinity and reads them back).
    Arrays and fields marked ``repr=False`` inside dataclasses are kept
    only when they are small.
    """
    if isinstance(obj, (str, bool)) or obj is None:
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {}
        for f in dataclasses.fields(obj):
            if not f.repr:
                continue
            out[f.name] = to_jsonable(getattr(obj, f.name))
        return out
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if hasattr(obj, "__dict__"):
        return {k: to_jsonable(v) for k, v in vars(obj).items() if not k.startswith("_")}
    return repr(obj)


@dataclasses.dataclass
class Report:
    """Outcome of one command.

    ``inputs`` echoes the validated configuration, ``results`` holds the
    payload and ``timings`` the wall-clock seconds per stage. Everything is
    normalised to JSON-native values on construction, so a report survives
    ``from_json(to_json())`` unchanged.
    """

    command: str
    inputs: dict
    results: dict
    timings: dict = dataclasses.field(default_factory=dict)
    diagnostics: dict = dataclasses.field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def __post_init__(self):
        self.inputs = to_jsonable(self.inputs)
        self.results = to_jsonable(self.results)
        self.timings = to_jsonable(self.timings)
        self.diagnostics = to_jsonable(self.diagnostics)

    def to_dict(self):
        return dataclasses.asdict(self)

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    def deterministic_json(self):
        """Serialisation without timings, for reproducibility comparisons."""
        d = self.to_dict()
        d.pop("timings")
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        if "schema_version" not in data:
            raise ValueError("report has no schema_version")
        return cls(data["command"], data["inputs"], data["results"],
                   data.get("timings", {}), data.get("diagnostics", {}),
                   data["schema_version"])

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def write(self, path):
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(self.to_json() + "\n")


def write_csv(path, columns):
    """Write equal-length columns (an ordered mapping name -> sequence)."""
    names = list(columns)
    data = [np.asarray(columns[c]) for c in names]
    if len({len(d) for d in data}) > 1:
        raise ValueError("CSV columns differ in length")
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in zip(*data):
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                        for v in row])


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return {h: [r[i] for r in body] for i, h in enumerate(header)}


# ---------------------------------------------------------------------------
# cache
# ---------------------------------------------------------------------------

def canonical_key(fields):
    """SHA-256 of the canonical JSON of ``fields`` (sorted keys, floats by repr)."""
    def canon(v):
        if isinstance(v, float):
            if not math.isfinite(v):
                raise ValueError("cache keys need finite numbers")
            return repr(v)
        if isinstance(v, (list, tuple)):
            return [canon(x) for x in v]
        if isinstance(v, dict):
            return {k: canon(x) for k, x in v.items()}
        return v
    text = json.dumps(canon(to_jsonable(fields)), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def default_cache_dir():
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or Path.home() / ".cache"
    return Path(base) / "solerlab"


class ResultCache:
    """Reports stored as ``<dir>/<key[:2]>/<key>.json``.

    Entries are written atomically. A corrupt entry is reported with a
    warning, removed and treated as a miss. Deleting the directory is
    always safe.
    """

    def __init__(self, directory=None):
        self.directory = Path(directory) if directory else default_cache_dir()

    def path(self, key):
        return self.directory / key[:2] / f"{key}.json"

    def lookup(self, key):
        p = self.path(key)
        if not p.exists():
            return None
        try:
            return Report.from_json(p.read_text())
        except (ValueError, KeyError, TypeError) as exc:
            warnings.warn(f"discarding corrupt cache entry {p.name}: {exc}", RuntimeWarning,
                          stacklevel=2)
            p.unlink(missing_ok=True)
            return None

    def store(self, key, report):
        p = self.path(key)
        p.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=p.parent, suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            fh.write(report.to_json())
        os.replace(tmp, p)
        return p


def cache_lookup(key, directory=None):
    return ResultCache(directory).lookup(key)


def cache_store(key, report, directory=None):
    return ResultCache(directory).store(key, report)

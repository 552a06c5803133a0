"""
Plain-text file formats.

Configs and run summaries are flat ``key = value`` files where ``#`` starts a
comment. Numeric tables are CSV with a one-line header; complex values are
stored as separate ``*_re`` / ``*_im`` columns and floats are written with 17
significant digits so they read back exactly.
"""

import csv
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .factorize import AnalogFactorization, DigitalFactorization


class ConfigError(ValueError):
    pass


def fmt(x):
    return format(float(x), ".17g")


def read_keyvalue(path):
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        out[key] = value
    return out


def write_keyvalue(path, items):
    lines = [f"{k} = {v}" for k, v in items.items()]
    Path(path).write_text("\n".join(lines) + "\n")


def parse_floats(text):
    return [float(s) for s in text.replace(",", " ").split()]


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything ``design`` and ``scan`` need, with the published defaults."""

    array: str = "ula"
    n: int = 11
    positions: tuple = ()
    mode: str = "fixed"
    q: int = 1
    q_max: int = 0
    sidelobe_db: float = 40.0
    target_file: str = ""
    normalize: str = "window"
    step: float = 1e-3
    max_iter: int = 10_000
    eps_max: float = -1.0
    eps_rel: float = 1e-4
    restarts: int = 1
    seed: int = 0
    workers: int = 1
    design_points: int = 99
    eval_points: int = 200
    scan_points: int = 200
    noise_std: float = 0.0

    def __post_init__(self):
        if self.array not in ("ula", "mra7", "custom"):
            raise ConfigError(f"unknown array kind {self.array!r}")
        if self.array == "custom" and not self.positions:
            raise ConfigError("custom array needs 'positions'")
        if self.mode not in ("fixed", "minimize"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.normalize not in ("peak", "window"):
            raise ConfigError(f"unknown normalize {self.normalize!r}")
        checks = [
            (self.n >= 1, "n must be >= 1"),
            (self.q >= 1, "q must be >= 1"),
            (self.q_max >= 0, "q_max must be >= 0"),
            (self.sidelobe_db > 0, "sidelobe_db must be positive"),
            (self.step > 0, "step must be positive"),
            (self.max_iter >= 1, "max_iter must be >= 1"),
            (self.eps_rel >= 0, "eps_rel must be >= 0"),
            (self.restarts >= 1, "restarts must be >= 1"),
            (self.workers >= 1, "workers must be >= 1"),
            (self.design_points >= 1, "design_points must be >= 1"),
            (self.eval_points >= 2, "eval_points must be >= 2"),
            (self.scan_points >= 1, "scan_points must be >= 1"),
            (self.noise_std >= 0, "noise_std must be >= 0"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)

    @property
    def abs_tol(self):
        """Absolute tolerance if one was given, else None (relative)."""
        return None if self.eps_max < 0 else self.eps_max

    def updated(self, items):
        """Copy with string-valued overrides, converted to field types."""
        types = {f.name: f.type for f in fields(self)}
        kw = {}
        for key, raw in items.items():
            if key not in types:
                raise ConfigError(f"unknown config key {key!r}")
            typ = types[key]
            try:
                if typ is tuple:
                    kw[key] = tuple(parse_floats(raw))
                elif typ is int:
                    kw[key] = int(raw)
                elif typ is float:
                    kw[key] = float(raw)
                else:
                    kw[key] = raw
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        return replace(self, **kw)

    @classmethod
    def from_file(cls, path, base=None):
        return (base or cls()).updated(read_keyvalue(path))


PRESETS = {
    "ula11": ExperimentConfig(array="ula", n=11, q=1),
    "mra7": ExperimentConfig(array="mra7", q=2),
}


def write_table(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) if isinstance(x, (float, np.floating))
                        else x for x in row])


def read_table(path):
    """Return ``(header, columns)`` where columns maps name -> list of str."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ConfigError(f"{path}: empty file") from None
        rows = [r for r in reader if r]
    for i, r in enumerate(rows, 2):
        if len(r) != len(header):
            raise ConfigError(f"{path}:{i}: expected {len(header)} fields")
    cols = {h: [r[j] for r in rows] for j, h in enumerate(header)}
    return header, cols


def _floats(cols, name, path):
    if name not in cols:
        raise ConfigError(f"{path}: missing column {name!r}")
    try:
        return np.array([float(x) for x in cols[name]])
    except ValueError as exc:
        raise ConfigError(f"{path}: non-numeric value in {name!r}") from exc


def read_complex_column(path, prefix):
    _, cols = read_table(path)
    return _floats(cols, f"{prefix}_re", path) \
        + 1j * _floats(cols, f"{prefix}_im", path)


def write_matrix(path, w):
    w = np.asarray(w)
    rows = [(i, j, w[i, j].real, w[i, j].imag)
            for j in range(w.shape[1]) for i in range(w.shape[0])]
    write_table(path, ["row", "col", "re", "im"], rows)


def read_matrix(path):
    _, cols = read_table(path)
    r = _floats(cols, "row", path).astype(int)
    c = _floats(cols, "col", path).astype(int)
    vals = _floats(cols, "re", path) + 1j * _floats(cols, "im", path)
    if r.size == 0:
        raise ConfigError(f"{path}: no matrix entries")
    if r.min() < 0 or c.min() < 0:
        raise ConfigError(f"{path}: negative index")
    w = np.zeros((r.max() + 1, c.max() + 1), dtype=complex)
    filled = np.zeros(w.shape, dtype=bool)
    w[r, c] = vals
    filled[r, c] = True
    if not filled.all():
        raise ConfigError(f"{path}: matrix has missing entries")
    return w


def write_solution(out, fact, summary):
    """Write ``phases.csv``, ``gains.csv`` and ``solution.txt`` to ``out``."""
    out = Path(out)
    rows = []
    for side, f in (("t", fact.f_t), ("r", fact.f_r)):
        for q in range(f.shape[1]):
            for n in range(f.shape[0]):
                rows.append((side, q, n, float(np.angle(f[n, q]))))
    write_table(out / "phases.csv", ["side", "component", "element",
                                     "phase_rad"], rows)
    write_table(out / "gains.csv",
                ["component", "c_t_re", "c_t_im", "c_r_re", "c_r_im"],
                [(q, fact.c_t[q].real, fact.c_t[q].imag, fact.c_r[q].real,
                  fact.c_r[q].imag) for q in range(fact.q)])
    write_keyvalue(out / "solution.txt", summary)


def read_solution(path):
    """Read a solution directory written by :func:`write_solution`.

    Returns
    -------
    AnalogFactorization
    summary : dict of str
    """
    path = Path(path)
    for name in ("phases.csv", "gains.csv", "solution.txt"):
        if not (path / name).exists():
            raise ConfigError(f"{path}: missing {name}")
    summary = read_keyvalue(path / "solution.txt")
    _, g = read_table(path / "gains.csv")
    q = len(g.get("component", []))
    c_t = _floats(g, "c_t_re", path) + 1j * _floats(g, "c_t_im", path)
    c_r = _floats(g, "c_r_re", path) + 1j * _floats(g, "c_r_im", path)
    _, p = read_table(path / "phases.csv")
    side = p.get("side", [])
    comp = _floats(p, "component", path).astype(int)
    elem = _floats(p, "element", path).astype(int)
    phase = _floats(p, "phase_rad", path)
    mats = {}
    for s in ("t", "r"):
        sel = np.array([x == s for x in side], dtype=bool)
        n = int(elem[sel].max()) + 1 if sel.any() else int(
            summary.get(f"n_{s}x", 0))
        f = np.zeros((n, q), dtype=complex)
        f[elem[sel], comp[sel]] = np.exp(1j * phase[sel])
        mats[s] = f
    return AnalogFactorization(mats["t"], mats["r"], c_t, c_r), summary


def write_digital(path, digital):
    rows = []
    for side, w in (("t", digital.tx), ("r", digital.rx)):
        for q in range(w.shape[1]):
            for n in range(w.shape[0]):
                rows.append((side, q, n, w[n, q].real, w[n, q].imag))
    write_table(path, ["side", "component", "element", "re", "im"], rows)


def read_digital(path, n_t, n_r):
    _, p = read_table(path)
    side = p.get("side", [])
    comp = _floats(p, "component", path).astype(int)
    elem = _floats(p, "element", path).astype(int)
    val = _floats(p, "re", path) + 1j * _floats(p, "im", path)
    q = int(comp.max()) + 1 if comp.size else 0
    out = {}
    for s, n in (("t", n_t), ("r", n_r)):
        sel = np.array([x == s for x in side], dtype=bool)
        w = np.zeros((n, q), dtype=complex)
        w[elem[sel], comp[sel]] = val[sel]
        out[s] = w
    return DigitalFactorization(out["t"], out["r"])


def read_scene(path):
    """Scatterer table with columns ``angle_rad, reflectivity_re,
    reflectivity_im``."""
    _, cols = read_table(path)
    ang = _floats(cols, "angle_rad", path)
    gam = _floats(cols, "reflectivity_re", path) \
        + 1j * _floats(cols, "reflectivity_im", path)
    return list(zip(ang.tolist(), gam.tolist()))

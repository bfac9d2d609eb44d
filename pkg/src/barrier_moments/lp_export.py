"""Free-format MPS export of a moment LP for external solver cross-checks."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .moment_lp import MomentLP


def _name(prefix: str, k: int) -> str:
    return f"{prefix}{k}"


def to_free_mps(lp: MomentLP, name: str = "MOMENTLP") -> str:
    """Render ``lp`` in free MPS. Variables are ``Z0..``, rows ``E0..``/``L0..``.

    Original labels are kept as comments; the external factor is not part of
    the file and must be applied to the optimum by the reader.
    """
    lines = [f"* moment LP N={lp.N} sense={lp.sense} factor={float(lp.factor)!r}", f"NAME {name}"]
    lines += ["OBJSENSE", "    MAX" if lp.sense == "max" else "    MIN"]
    lines.append("ROWS")
    lines.append(" N OBJ")
    for k in range(lp.A_eq.shape[0]):
        lines.append(f" E {_name('E', k)}")
    for k in range(lp.A_ub.shape[0]):
        lines.append(f" L {_name('L', k)}")
    lines.append("COLUMNS")
    eq = lp.A_eq.tocsc()
    ub = lp.A_ub.tocsc()
    for j in range(lp.n_vars):
        col = _name("Z", j)
        if lp.c[j] != 0.0:
            lines.append(f"    {col} OBJ {float(lp.c[j])!r}")
        for mat, prefix in ((eq, "E"), (ub, "L")):
            start, end = mat.indptr[j], mat.indptr[j + 1]
            for r, v in zip(mat.indices[start:end], mat.data[start:end]):
                lines.append(f"    {col} {_name(prefix, r)} {float(v)!r}")
    lines.append("RHS")
    for vec, prefix in ((lp.b_eq, "E"), (lp.b_ub, "L")):
        for r in np.flatnonzero(vec):
            lines.append(f"    RHS {_name(prefix, r)} {float(vec[r])!r}")
    lines.append("ENDATA")
    return "\n".join(lines) + "\n"


def write_mps(lp: MomentLP, path: str | Path, name: str = "MOMENTLP") -> Path:
    path = Path(path)
    path.write_text(to_free_mps(lp, name))
    return path


def read_free_mps(text: str) -> dict:
    """Minimal reader for files written by :func:`to_free_mps` (round-trip tests)."""
    section = None
    rows: dict[str, str] = {}
    cols: dict[str, dict[str, float]] = {}
    rhs: dict[str, float] = {}
    sense = "min"
    for raw in text.splitlines():
        if not raw.strip() or raw.startswith("*"):
            continue
        if not raw.startswith(" "):
            section = raw.split()[0]
            continue
        parts = raw.split()
        if section == "OBJSENSE":
            sense = parts[0].lower()
        elif section == "ROWS":
            rows[parts[1]] = parts[0]
        elif section == "COLUMNS":
            cols.setdefault(parts[0], {})[parts[1]] = float(parts[2])
        elif section == "RHS":
            rhs[parts[1]] = float(parts[2])
    return {"sense": sense, "rows": rows, "columns": cols, "rhs": rhs}

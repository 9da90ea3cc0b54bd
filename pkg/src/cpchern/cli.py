"""Command-line front end: YAML run configs in, CSV data out.

    cpchern conductivity --config run.yaml --out sigma.csv
    cpchern shift        --config run.yaml --out shift.csv
    cpchern force        --config run.yaml --out force.csv
    cpchern figure fig2a --out figdir/

Example config::

    surface:
      dispersive: {t: 1.0, u: -1.0, a: 1.0, broadening: 0.01, grid_n: 256}
      # or: nondispersive: {C: -1}
    atom:
      omega10: 1.9            # in units of t (dispersive) or any unit (nondispersive)
      # or: transition_wavelength: 707.202e-9   (metres; nondispersive only)
      mu: 1.0                 # e*a0 when transition_wavelength is given
      polarization: right
    sweep: {variable: eta, min: 1, max: 30, points: 600, spacing: linear}
    output: {path: shift.csv, format: csv}
    quadrature: {rel_tol: 1.0e-9}

Everything runs in natural units (c = hbar = 1).  When the atom is given by
its wavelength, lengths are measured in c/omega10 and the force table gains SI
columns.  Failures print one JSON object on stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .casimir_polder import (
    TwoLevelAtom,
    farfield_force,
    force_numeric,
    nonresonant_shift,
    resonant_shift_components,
    transition_rate,
)
from .conductivity import (
    QuantizedHallSurface,
    QwzSurface,
    kubo_sigma_batch,
    sigma_imag_axis,
)
from .constants import C_SI, E_A0_SI, EPS0_SI
from .lattice_model import QwzModel, chern_number
from .numerics import QuadratureError, QuadratureSpec

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config", "main",
           "cmd_conductivity", "cmd_shift", "cmd_force", "cmd_figure", "format_csv"]

FIGURES = ("fig1", "fig2a", "fig2b")


class ConfigError(ValueError):
    """Invalid configuration; ``key`` is a dotted path, ``line`` 1-based when known."""

    def __init__(self, message, key=None, line=None):
        super().__init__(message)
        self.key = key
        self.line = line


@dataclass(frozen=True)
class Sweep:
    variable: str
    min: float
    max: float
    points: int
    spacing: str = "linear"

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.min, self.max, self.points)
        return np.linspace(self.min, self.max, self.points)


@dataclass(frozen=True)
class RunConfig:
    surface: object
    atom: TwoLevelAtom | None
    sweep: Sweep | None
    output_path: str | None
    quadrature: QuadratureSpec
    wavelength: float | None = None
    include_nonresonant: bool = True

    @property
    def dispersive(self) -> bool:
        return isinstance(self.surface, QwzSurface)


# --- configuration ---------------------------------------------------------

def _key_lines(node, prefix=(), out=None):
    """Map dotted key paths to 1-based source lines of a composed YAML tree."""
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            path = prefix + (str(k.value),)
            out[".".join(path)] = k.start_mark.line + 1
            _key_lines(v, path, out)
    return out


def load_config(path) -> RunConfig:
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
        lines = _key_lines(yaml.compose(text))
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {exc}",
                          line=None if mark is None else mark.line + 1) from None
    return parse_config(data or {}, lines)


class _Reader:
    def __init__(self, lines):
        self.lines = lines

    def fail(self, key, message):
        raise ConfigError(f"{key}: {message}", key=key, line=self.lines.get(key))

    def section(self, data, key, required=True):
        value = data.get(key.rsplit(".", 1)[-1]) if isinstance(data, dict) else None
        if value is None:
            if required:
                self.fail(key, "missing section")
            return {}
        if not isinstance(value, dict):
            self.fail(key, "expected a mapping")
        return value

    def number(self, data, key, default=None, positive=False):
        name = key.rsplit(".", 1)[-1]
        if name not in data:
            if default is None:
                self.fail(key, "missing value")
            return default
        value = data[name]
        if isinstance(value, str):
            # YAML 1.1 reads exponents without a sign (2.0e4) as strings
            try:
                value = float(value)
            except ValueError:
                pass
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(key, f"expected a number, got {value!r}")
        if positive and not value > 0:
            self.fail(key, "must be positive")
        return float(value)

    def choice(self, data, key, options, default=None):
        name = key.rsplit(".", 1)[-1]
        value = data.get(name, default)
        if value not in options:
            self.fail(key, f"expected one of {list(options)}, got {value!r}")
        return value


def _parse_surface(r: _Reader, data):
    surf = r.section(data, "surface")
    variants = [k for k in ("dispersive", "nondispersive") if k in surf]
    if len(variants) != 1:
        r.fail("surface", "give exactly one of 'dispersive' or 'nondispersive'")
    if variants[0] == "nondispersive":
        s = r.section(surf, "surface.nondispersive")
        C = s.get("C")
        if isinstance(C, bool) or not isinstance(C, int):
            r.fail("surface.nondispersive.C", f"expected an integer, got {C!r}")
        return QuantizedHallSurface(C)
    s = r.section(surf, "surface.dispersive")
    t = r.number(s, "surface.dispersive.t", 1.0, positive=True)
    u = r.number(s, "surface.dispersive.u", t)
    a = r.number(s, "surface.dispersive.a", 1.0, positive=True)
    broadening = r.number(s, "surface.dispersive.broadening", 1e-2 * t, positive=True)
    grid_n = s.get("grid_n", 256)
    if isinstance(grid_n, bool) or not isinstance(grid_n, int) or grid_n < 32:
        r.fail("surface.dispersive.grid_n", "must be an integer >= 32")
    model = QwzModel(t=t, u=u, a=a)
    if not model.is_gapped:
        r.fail("surface.dispersive.u", "band touching: u must avoid 0 and +-2t")
    return QwzSurface(model=model, broadening=broadening, grid_n=grid_n)


def _parse_atom(r: _Reader, data, dispersive):
    if "atom" not in data:
        return None, None
    atom = r.section(data, "atom")
    has_w = "omega10" in atom
    has_l = "transition_wavelength" in atom
    if has_w == has_l:
        r.fail("atom", "give exactly one of 'omega10' or 'transition_wavelength'")
    mu = r.number(atom, "atom.mu", 1.0, positive=True)
    pol = r.choice(atom, "atom.polarization", ("right", "left"), "right")
    if has_w:
        return TwoLevelAtom(mu, r.number(atom, "atom.omega10", positive=True), pol), None
    if dispersive:
        r.fail("atom.transition_wavelength",
               "SI wavelengths need the nondispersive surface; give omega10 in units of t")
    wavelength = r.number(atom, "atom.transition_wavelength", positive=True)
    return TwoLevelAtom(mu, 1.0, pol), wavelength


def _parse_sweep(r: _Reader, data):
    if "sweep" not in data:
        return None
    s = r.section(data, "sweep")
    variable = r.choice(s, "sweep.variable", ("z0", "eta", "omega", "xi"))
    lo = r.number(s, "sweep.min")
    hi = r.number(s, "sweep.max")
    points = s.get("points")
    spacing = r.choice(s, "sweep.spacing", ("linear", "log"), "linear")
    if not lo < hi:
        r.fail("sweep.max", f"empty sweep range: min {lo} must be below max {hi}")
    if isinstance(points, bool) or not isinstance(points, int) or points < 2:
        r.fail("sweep.points", "must be an integer >= 2")
    if lo < 0 or (spacing == "log" and lo <= 0):
        r.fail("sweep.min", "must be positive for log spacing and non-negative otherwise")
    return Sweep(variable, lo, hi, points, spacing)


def _parse_quadrature(r: _Reader, data):
    q = r.section(data, "quadrature", required=False)
    rel = r.number(q, "quadrature.rel_tol", 1e-9, positive=True)
    abs_tol = r.number(q, "quadrature.abs_tol", 0.0)
    n = q.get("max_subdivisions", 2000)
    if isinstance(n, bool) or not isinstance(n, int) or n < 16:
        r.fail("quadrature.max_subdivisions", "must be an integer >= 16")
    if abs_tol < 0:
        r.fail("quadrature.abs_tol", "must be non-negative")
    return QuadratureSpec(rel, abs_tol, n)


def parse_config(data: dict, lines: dict | None = None) -> RunConfig:
    """Validate a loaded config mapping; ``lines`` maps dotted keys to source lines."""
    r = _Reader(lines or {})
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping at top level")
    surface = _parse_surface(r, data)
    atom, wavelength = _parse_atom(r, data, isinstance(surface, QwzSurface))
    out = r.section(data, "output", required=False)
    r.choice(out, "output.format", ("csv",), "csv")
    path = out.get("path")
    extra = r.section(data, "shift", required=False)
    include = extra.get("include_nonresonant", True)
    if not isinstance(include, bool):
        r.fail("shift.include_nonresonant", "expected true or false")
    return RunConfig(surface, atom, _parse_sweep(r, data), path, _parse_quadrature(r, data),
                     wavelength, include)


# --- commands ----------------------------------------------------------------

def _need(cfg: RunConfig, what: str, allowed=None):
    if what == "atom" and cfg.atom is None:
        raise ConfigError("atom: missing section", key="atom")
    if what == "sweep":
        if cfg.sweep is None:
            raise ConfigError("sweep: missing section", key="sweep")
        if cfg.sweep.variable not in allowed:
            raise ConfigError(f"sweep.variable: expected one of {list(allowed)} for this command",
                              key="sweep.variable")


def cmd_conductivity(cfg: RunConfig):
    """Kubo conductivity along the real (omega) or imaginary (xi) axis, in e^2/hbar."""
    if not cfg.dispersive:
        raise ConfigError("surface: the conductivity command needs the dispersive surface",
                          key="surface")
    _need(cfg, "sweep", ("omega", "xi"))
    s = cfg.surface
    t = s.model.t
    x = cfg.sweep.values()
    if cfg.sweep.variable == "omega":
        sigma = kubo_sigma_batch(s.model, x * t, s.eta, s.grid_n)
        first = "omega_over_t"
    else:
        sigma = sigma_imag_axis(s.model, x * t, s.grid_n)
        first = "xi_over_t"
    xx = np.asarray(sigma.xx, dtype=complex)
    xy = np.asarray(sigma.xy, dtype=complex)
    header = [first, "re_sigma_xx", "im_sigma_xx", "re_sigma_xy", "im_sigma_xy"]
    rows = np.column_stack([x, xx.real, xx.imag, xy.real, xy.imag])
    return header, rows


def _heights(cfg: RunConfig):
    values = cfg.sweep.values()
    if cfg.sweep.variable == "eta":
        return values, values / (2.0 * cfg.atom.omega10)
    return 2.0 * cfg.atom.omega10 * values, values


def _warn_row(i, x, exc):
    print(json.dumps({"warning": "row skipped", "row": i, "value": float(x),
                      "message": str(exc)}), file=sys.stderr)


def cmd_shift(cfg: RunConfig):
    """Resonant (upper state) and nonresonant (lower state) shifts in units of R10."""
    _need(cfg, "atom")
    _need(cfg, "sweep", ("z0", "eta"))
    atom = cfg.atom
    rate = transition_rate(atom)
    closed = isinstance(cfg.surface, QuantizedHallSurface)
    header = ["eta", "z0", "resonant_shift_nd", "term_xx_nd", "term_xy_nd",
              "nonresonant_shift_nd"]
    rows = []
    for i, (eta, z0) in enumerate(zip(*_heights(cfg))):
        try:
            comp = resonant_shift_components(atom, cfg.surface, z0, cfg.quadrature)
            nonres = (nonresonant_shift(atom, cfg.surface, z0, "lower", cfg.quadrature, closed)
                      / rate if cfg.include_nonresonant else np.nan)
        except QuadratureError as exc:
            _warn_row(i, z0, exc)
            continue
        rows.append([eta, z0, comp.total_nd, comp.term_xx_nd, comp.term_xy_nd, nonres])
    return header, np.array(rows, dtype=float).reshape(-1, len(header))


def _surface_chern(surface) -> int:
    if isinstance(surface, QuantizedHallSurface):
        return surface.C
    return chern_number(surface.model)


def cmd_force(cfg: RunConfig):
    """Nonresonant force on the lower state: full quadrature next to the far-field form."""
    _need(cfg, "atom")
    _need(cfg, "sweep", ("z0", "eta"))
    atom = cfg.atom
    C = _surface_chern(cfg.surface)
    closed = isinstance(cfg.surface, QuantizedHallSurface)
    header = ["z0", "force_numeric", "force_farfield", "repulsion_flag"]
    si = cfg.wavelength is not None
    if si:
        header += ["z0_m", "force_N"]
        omega_si = 2.0 * np.pi * C_SI / cfg.wavelength
        length = C_SI / omega_si
        # mu is in units of e*a0, so the natural force is already scaled by mu^2
        force_unit = E_A0_SI**2 / (4.0 * np.pi * EPS0_SI) / length**4
    rows = []
    for i, (_, z0) in enumerate(zip(*_heights(cfg))):
        try:
            f = force_numeric(atom, cfg.surface, z0, "lower", "nonresonant", "analytic",
                              cfg.quadrature, closed)
        except QuadratureError as exc:
            _warn_row(i, z0, exc)
            continue
        row = [z0, f, farfield_force(atom, C, z0), float(np.sign(f))]
        if si:
            row += [z0 * length, f * force_unit]
        rows.append(row)
    return header, np.array(rows, dtype=float).reshape(-1, len(header))


def _figure_surface(cfg: RunConfig | None, u_sign: int) -> QwzSurface:
    base = cfg.surface if cfg is not None and cfg.dispersive else QwzSurface()
    m = base.model
    return QwzSurface(model=QwzModel(t=m.t, u=u_sign * m.t, a=m.a),
                      broadening=base.broadening, grid_n=base.grid_n)


def _figure_points(cfg, default):
    return default if cfg is None or cfg.sweep is None else cfg.sweep.points


def cmd_figure(name: str, cfg: RunConfig | None = None) -> dict:
    """Data bundles for the conductivity and resonant-shift figures.

    Returns a mapping ``{file stem: (header, rows)}``.
    """
    if name not in FIGURES:
        raise ConfigError(f"unknown figure {name!r}; expected one of {list(FIGURES)}")
    spec = cfg.quadrature if cfg is not None else QuadratureSpec()
    if name == "fig1":
        omegas = np.linspace(0.0, 8.0, _figure_points(cfg, 321))
        data = {}
        for u_sign in (1, -1):
            s = _figure_surface(cfg, u_sign)
            sigma = kubo_sigma_batch(s.model, omegas * s.model.t, s.eta, s.grid_n)
            data[u_sign] = (np.asarray(sigma.xx), np.asarray(sigma.xy))
        parts = {"fig1a": lambda xx, xy: xx.real, "fig1b": lambda xx, xy: xx.imag,
                 "fig1c": lambda xx, xy: xy.real, "fig1d": lambda xx, xy: xy.imag}
        return {stem: (["omega_over_t", "u_plus_t", "u_minus_t"],
                       np.column_stack([omegas, pick(*data[1]), pick(*data[-1])]))
                for stem, pick in parts.items()}

    etas = np.linspace(1.0, 30.0, _figure_points(cfg, 600))

    def series(C, omega, part="total"):
        surface = QwzSurface.with_chern(C) if cfg is None else _figure_surface(
            cfg, _u_sign_for(C, cfg))
        atom = TwoLevelAtom(1.0, omega * surface.model.t, "right")
        out = []
        for eta in etas:
            comp = resonant_shift_components(atom, surface, eta / (2.0 * atom.omega10), spec)
            out.append({"total": comp.total_nd, "xx": comp.term_xx_nd,
                        "xy": comp.term_xy_nd}[part])
        return np.array(out)

    if name == "fig2a":
        header = ["eta", "c_plus1_omega_1t", "c_plus1_omega_1p9t",
                  "c_minus1_omega_1t", "c_minus1_omega_1p9t"]
        cols = [series(C, w) for C in (1, -1) for w in (1.0, 1.9)]
        return {"fig2a": (header, np.column_stack([etas] + cols))}
    header = ["eta", "total", "term_xx", "term_xy"]
    cols = [series(-1, 1.9, part) for part in ("total", "xx", "xy")]
    return {"fig2b": (header, np.column_stack([etas] + cols))}


def _u_sign_for(C: int, cfg: RunConfig) -> int:
    m = _figure_surface(cfg, 1).model
    return 1 if chern_number(m) == C else -1


# --- output ------------------------------------------------------------------

def format_csv(header, rows) -> str:
    """Header plus rows in 17-significant-digit scientific notation, LF line ends."""
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in np.atleast_2d(rows):
        buf.write(",".join("%.16e" % v for v in row) + "\n")
    return buf.getvalue()


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _error(exc, code):
    payload = {"error": type(exc).__name__, "message": str(exc)}
    for field in ("key", "line"):
        value = getattr(exc, field, None)
        if value is not None:
            payload[field] = value
    print(json.dumps(payload), file=sys.stderr)
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cpchern",
        description="Casimir-Polder shifts and forces of a circularly polarized atom "
                    "near a Chern insulator.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("conductivity", "Kubo conductivity sweep"),
                            ("shift", "resonant and nonresonant shift sweep"),
                            ("force", "nonresonant force sweep")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--out", help="output CSV (defaults to output.path, else stdout)")
    p = sub.add_parser("figure", help="regenerate figure data")
    p.add_argument("name", choices=FIGURES)
    p.add_argument("--config", help="optional YAML overriding model and grid settings")
    p.add_argument("--out", default=".", help="output directory for the CSV bundle")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else None
        if args.command == "figure":
            for stem, (header, rows) in cmd_figure(args.name, cfg).items():
                _write(Path(args.out) / f"{stem}.csv", format_csv(header, rows))
            return 0
        command = {"conductivity": cmd_conductivity, "shift": cmd_shift,
                   "force": cmd_force}[args.command]
        header, rows = command(cfg)
        _write(args.out or cfg.output_path, format_csv(header, rows))
        return 0
    except (ConfigError, OSError) as exc:
        return _error(exc, 2)
    except (ValueError, QuadratureError, ArithmeticError) as exc:
        return _error(exc, 1)


if __name__ == "__main__":
    sys.exit(main())

"""Evaluate a Config: single-point reports, sweep tables, oracle batteries."""
from __future__ import annotations

import math
import re

from . import coherent_core as cs
from .config import Config, ConfigError, _bool, _complex, _real
from .errors import InvalidArgument
from .model import (
    delta_opt,
    displaced_probe,
    enhancement_sweep,
    mz_readout,
    post_select,
    weak_value_nb,
)
from .noise import VARIANTS, NoiseModel, snr_curve
from .oracle import ORACLE_MAX_ALPHA, oracle_battery

COLUMNS = ("x", "value", "variant", "stderr")
MC_MAX_EVENTS = 10**6

_TOKEN = re.compile(r"^\s*([A-Za-z_]+)\s*(?:\((.*)\))?\s*$")
_SETUP_KEYS = {"phi0": _real, "alpha": _complex, "alpha2": _real, "delta": _real,
               "compensate_back_phase": _bool, "theta": _real}
_NOISE_KEYS = {"eta_bar": _real, "tau_c": _real, "shot_var": _real}


def parse_series(token: str):
    """``"kind(key=value, ...)"`` -> (kind, {key: value})."""
    m = _TOKEN.match(token)
    if not m:
        raise ConfigError("sweep.series", f"cannot parse series {token!r}")
    kind, body = m.group(1), m.group(2)
    overrides = {}
    for item in filter(None, (s.strip() for s in (body or "").split(","))):
        if "=" not in item:
            raise ConfigError("sweep.series", f"expected key=value in {token!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        conv = _SETUP_KEYS.get(key) or _NOISE_KEYS.get(key)
        if conv is None:
            raise ConfigError("sweep.series", f"unknown override {key!r} in {token!r}")
        try:
            overrides[key] = conv(value)
        except ValueError as exc:
            raise ConfigError("sweep.series", f"{token!r}: {exc}") from None
    return kind, overrides


def _apply(cfg: Config, overrides: dict):
    setup, noise = cfg.setup, cfg.noise
    s_kw = {k: v for k, v in overrides.items() if k in _SETUP_KEYS and k != "alpha2"}
    n_kw = {k: v for k, v in overrides.items() if k in _NOISE_KEYS}
    try:
        if s_kw:
            setup = setup.replace(**s_kw)
        if "alpha2" in overrides:
            setup = setup.with_alpha2(overrides["alpha2"])
        if n_kw:
            noise = NoiseModel(**{**noise.__dict__, **n_kw})
    except InvalidArgument as exc:
        raise ConfigError("sweep.series", str(exc)) from None
    return setup, noise


def state_report(cfg: Config) -> dict:
    p = cfg.setup
    post = post_select(p)
    readout = mz_readout(p, post)
    chi = cs.fock_amplitudes(displaced_probe(p), 3)
    wv = weak_value_nb(p.delta) if p.delta > 0 else (math.nan, math.nan)
    return {
        "p_exact": post.p_exact,
        "p_approx": post.p_approx,
        "epsilon": post.epsilon,
        "weak_regime": post.weak_regime,
        "weak_value_exact": wv[0],
        "weak_value_approx": wv[1],
        "enhancement": readout.enhancement,
        "phase_exact": readout.phase_exact,
        "phase_eq5": readout.phase_eq5,
        "m_minus": readout.m_minus,
        "m_plus": readout.m_plus,
        "delta_opt": delta_opt(p),
        "chi_fock": [(z.real, z.imag) for z in chi.tolist()],
    }


def sweep_rows(cfg: Config) -> list[tuple]:
    """Rows ``(x, value, variant, stderr)``; ``stderr`` is NaN for analytic values."""
    sw = cfg.sweep
    grid = sw.grid()
    rows = []
    for token in sw.series:
        kind, overrides = parse_series(token)
        setup, noise = _apply(cfg, overrides)
        if sw.axis in ("alpha2", "delta"):
            if kind not in ("enhancement", "weak_prediction"):
                raise ConfigError("sweep.series", f"series {kind!r} does not apply to axis {sw.axis}")
            table = enhancement_sweep(setup, sw.axis, grid)
            for row in table:
                value = row.enhancement_exact if kind == "enhancement" else row.enhancement_weak_prediction
                rows.append((row.x, value, token, math.nan))
        else:
            if kind not in VARIANTS:
                raise ConfigError("sweep.series", f"series {kind!r} does not apply to axis gamma")
            if sw.monte_carlo and max(grid) * cfg.run.total_time > MC_MAX_EVENTS:
                raise ConfigError(
                    "sweep.stop", f"Monte Carlo is limited to {MC_MAX_EVENTS} events per run"
                )
            for pt in snr_curve(setup, noise, cfg.run, grid, kind, monte_carlo=sw.monte_carlo):
                rows.append((pt.gamma, pt.snr, token, pt.snr_stderr))
    return rows


def oracle_check(cfg: Config):
    p = cfg.setup
    if abs(p.alpha) > ORACLE_MAX_ALPHA:
        raise InvalidArgument(
            f"oracle refuses |alpha|^2 = {p.alpha2:.6g}: the Fock check needs "
            f"|alpha| <= {ORACLE_MAX_ALPHA:g} (|alpha|^2 <= {ORACLE_MAX_ALPHA**2:g})"
        )
    return oracle_battery(cfg.oracle_draws, cfg.run.seed, alpha=p.alpha, phi0=p.phi0, base=p)

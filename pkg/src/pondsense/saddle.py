"""Stationary ionization times, channel bookkeeping, and the action.

The stationary-phase condition (p + A(t'))^2 = -2 I_p has two solutions per
laser cycle; they are labelled by the intracycle index e in {0, 1} and the
cycle index n.  For a monochromatic field the times are known in closed form;
for a pulse they are found by a damped complex Newton iteration seeded from
the locally equivalent monochromatic field.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .field import LaserField
from ._kernels.pybackend import mono_saddle_time, _newton_refine

TWO_PI = 2.0 * np.pi


class SaddleError(RuntimeError):
    """Saddle solver failed to converge."""


@dataclass(frozen=True)
class SaddleTime:
    t_ion: complex
    e: int
    n: int
    residual: float


@dataclass
class SaddleSet:
    entries: list[SaddleTime]
    channel_window: tuple[float, float]
    intra_pairs_included: bool
    n_channels: int

    def times(self) -> np.ndarray:
        return np.array([s.t_ion for s in self.entries])


@dataclass(frozen=True)
class Channels:
    """Selected ionization channels: per-event labels and real seed times."""

    e: np.ndarray
    n: np.ndarray
    t_seed: np.ndarray
    window: tuple[float, float]
    intra_pairs: bool
    n_channels: int

    def __len__(self):
        return self.e.size


def event_time(field: LaserField, e: int, n: int) -> float:
    """Real part of the (e, n) ionization time at p = 0 (a field extremum)."""
    return (TWO_PI * (n - e) - field.cep - (1 - 2 * e) * np.pi / 2.0) / field.omega


def default_window_start(field: LaserField) -> float:
    # Pulses: half maximum of the envelope.  Monochromatic: a quarter period
    # before the reference field extremum, so the first event sits at its
    # closed-form position.
    if field.is_mono:
        return -0.25 * field.period
    return -0.5 * field.tau


def select_channels(field: LaserField, n_channels: int | None,
                    intra_pairs: bool = True, start: float | None = None) -> Channels:
    """First ``n_channels`` ionization channels at or after ``start``.

    With ``intra_pairs`` both events of each cycle are kept (2 per channel);
    otherwise one event per cycle, on the intracycle branch of the earliest
    selected event.  ``n_channels=None`` selects one channel per FWHM cycle
    for pulses (and is rejected for monochromatic fields).
    """
    if start is None:
        start = default_window_start(field)
    if n_channels is None:
        if field.is_mono:
            raise ValueError("n_channels must be explicit for monochromatic fields")
        n_channels = max(1, int(round(field.tau / field.period)))
    if n_channels < 1:
        raise ValueError(f"n_channels must be >= 1, got {n_channels}")

    # enumerate candidate events around the window, sorted by time
    n_lo = int(np.floor(start / field.period)) - 2
    n_hi = n_lo + n_channels + 6
    events = []
    for n in range(n_lo, n_hi + 1):
        for e in (0, 1):
            t = event_time(field, e, n)
            if t >= start - 1e-9 * field.period:
                events.append((t, e, n))
    events.sort()

    if intra_pairs:
        chosen = events[: 2 * n_channels]
    else:
        # one event per cycle: of the two intracycle branches take the one
        # reaching the highest local intensity (the peak event for symmetric
        # pulses); ties fall to the branch that starts earlier
        cand = {e: [ev for ev in events if ev[1] == e][:n_channels]
                for e in (0, 1)}
        def score(evs):
            w = max(float(field.envelope_f(t) ** 2) for t, _, _ in evs)
            return (round(w, 12), -evs[0][0])
        chosen = max(cand.values(), key=score)
    if len(chosen) < (2 * n_channels if intra_pairs else n_channels):
        raise ValueError("channel enumeration exhausted; widen the window")

    t_seed = np.array([ev[0] for ev in chosen])
    return Channels(
        e=np.array([ev[1] for ev in chosen], dtype=np.int64),
        n=np.array([ev[2] for ev in chosen], dtype=np.int64),
        t_seed=t_seed,
        window=(start, float(t_seed.max() + 0.75 * field.period)),
        intra_pairs=intra_pairs,
        n_channels=n_channels,
    )


def default_t_ref(field: LaserField, channels: Channels | None = None) -> float:
    """Fixed global action reference: channel-window start (mono) or -3 tau."""
    if field.is_mono:
        if channels is not None:
            return channels.window[0]
        return default_window_start(field)
    return -3.0 * field.tau


def _residual(p_par, p_perp, t, field: LaserField, ip: float):
    return np.abs((p_par + field.vector_potential(t)) ** 2 + p_perp**2 + 2.0 * ip)


def mono_saddle_times(p, field: LaserField, ip: float,
                      channels: Channels | None = None,
                      n_range: tuple[int, int] | None = None) -> SaddleSet:
    """Closed-form saddle times of a monochromatic field at one momentum.

    Either a channel selection or an inclusive cycle-index range
    ``n_range=(n_min, n_max)`` (both intracycle branches) may be given.
    """
    if not field.is_mono:
        raise ValueError("mono_saddle_times requires a monochromatic field")
    p_par, p_perp = p
    if channels is None:
        if n_range is None:
            raise ValueError("pass channels or n_range")
        ee, nn = [], []
        for n in range(n_range[0], n_range[1] + 1):
            for e in (0, 1):
                ee.append(e)
                nn.append(n)
        ee, nn = np.array(ee), np.array(nn)
        window = (event_time(field, 1, n_range[0]) - 0.5 * field.period,
                  event_time(field, 0, n_range[1]) + 0.5 * field.period)
        intra, nch = True, n_range[1] - n_range[0] + 1
    else:
        ee, nn = channels.e, channels.n
        window = channels.window
        intra, nch = channels.intra_pairs, channels.n_channels

    entries = []
    for e, n in zip(ee, nn):
        t = complex(mono_saddle_time(p_par, p_perp, field.up, field.omega,
                                     field.cep, ip, e, n))
        r = float(_residual(p_par, p_perp, t, field, ip))
        entries.append(SaddleTime(t_ion=t, e=int(e), n=int(n), residual=r))
    entries.sort(key=lambda s: s.t_ion.real)
    return SaddleSet(entries, window, intra, nch)


def pulse_saddle_times(p, field: LaserField, ip: float,
                       channels: Channels | None = None,
                       accept_tol: float = 1e-10, max_iter: int = 50) -> SaddleSet:
    """Newton-refined saddle times of a pulse at one momentum."""
    if field.is_mono:
        raise ValueError("pulse_saddle_times requires a pulse")
    if channels is None:
        channels = select_channels(field, None, intra_pairs=True)
    p_par, p_perp = p
    c2 = np.array([p_perp**2 + 2.0 * ip])
    entries = []
    for e, n, ts in zip(channels.e, channels.n, channels.t_seed):
        up_loc = field.up * max(field.envelope_f(ts) ** 2, 1e-8)
        seed = mono_saddle_time(p_par, p_perp, up_loc, field.omega, field.cep,
                                ip, e, n)
        t, res = _newton_refine(np.array([seed], dtype=complex), p_par,
                                field.vector_potential, field.a_prime,
                                c2, 1e-12, max_iter)
        entries.append(SaddleTime(t_ion=complex(t[0]), e=int(e), n=int(n),
                                  residual=float(res[0])))
    entries.sort(key=lambda s: s.t_ion.real)
    bad = [s for s in entries if s.residual > accept_tol]
    out = SaddleSet(entries, channels.window, channels.intra_pairs,
                    channels.n_channels)
    out.n_failed = len(bad)
    return out


@dataclass(frozen=True)
class ActionBundle:
    s: complex
    ds_dup: complex
    s_dd: complex


def action_bundle(p, t, field: LaserField, ip: float, t_ref: float) -> ActionBundle:
    """Action S(p, t), its U_p derivative, and d^2 S/dt^2 at (possibly complex) t.

    S = I_p t + (1/2) int_{t_ref}^{t} (p + A)^2; the U_p derivative follows
    from A ~ sqrt(U_p) at fixed t and reference.
    """
    p_par, p_perp = p
    ia = complex(field.int_a(t_ref, t))
    ia2 = complex(field.int_a2(t_ref, t))
    p2 = p_par**2 + p_perp**2
    s = ip * t + 0.5 * (p2 * (t - t_ref) + 2.0 * p_par * ia + ia2)
    ds_dup = (p_par * ia + ia2) / (2.0 * field.up)
    s_dd = (p_par + complex(field.vector_potential(t))) * complex(field.a_prime(t))
    return ActionBundle(s=s, ds_dup=ds_dup, s_dd=s_dd)

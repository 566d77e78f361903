"""Monte-Carlo photocounting experiment on the four-mode Bell states.

A virtual run measures one Stokes component per series (three series
per witness estimate).  For the canonical analyzer settings the exact
joint photocount distribution of a Bell state is known in closed form:
the pair occupation (n, m) is drawn with probability
``lambda_n lambda_m`` and the two beams' analyzer-basis counts are
either crossed, (x_a, y_a; x_b, y_b) = (n, m; m, n), or parallel,
(n, m; n, m), depending on the state and the measured component:

    state       S_1       S_2       S_3
    psi-minus   cross     cross     cross
    psi-plus    cross     parallel  parallel
    phi-plus    parallel  parallel  cross
    phi-minus   parallel  cross     parallel

The crossed columns make x - y sum to zero across the beams, the
parallel ones make it cancel under subtraction -- exactly the sign
pattern of the witness matched to the state.  Detection loss is
binomial thinning, applied per mode.

Reproducibility: pulses are generated in fixed blocks of
``BLOCK_PULSES``; each block owns a counter-addressed Philox stream
keyed by (seed; block, series, run), so results are byte-identical for
any worker count and any schedule.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .states import BellLabel, FourModeState, geometric_ratio, mean_photons_per_mode
from .witnesses import WitnessKind, WitnessReport

log = logging.getLogger(__name__)

#: pulses per atomic RNG block (the merge unit for multi-worker runs)
BLOCK_PULSES = 4096

#: analyzer plate angles (hwp_deg, qwp_deg) realizing each Stokes component
CANONICAL_SETTINGS = {1: (0.0, 0.0), 2: (22.5, 45.0), 3: (0.0, 45.0)}

#: count pairing per (state, component); see module docstring
PAIRING_TABLE = {
    BellLabel.PSI_MINUS: ("cross", "cross", "cross"),
    BellLabel.PSI_PLUS: ("cross", "parallel", "parallel"),
    BellLabel.PHI_PLUS: ("parallel", "parallel", "cross"),
    BellLabel.PHI_MINUS: ("parallel", "cross", "parallel"),
}


@dataclass(frozen=True)
class MeasurementSetting:
    """Analyzer wave-plate angles, applied identically to both beams."""

    hwp_deg: float
    qwp_deg: float

    @property
    def component(self) -> int | None:
        """Stokes component this setting realizes, if canonical."""
        for comp, (h, q) in CANONICAL_SETTINGS.items():
            if abs(self.hwp_deg - h) < 1e-12 and abs(self.qwp_deg - q) < 1e-12:
                return comp
        return None

    def jones(self) -> np.ndarray:
        from .polarization import half_wave_plate, quarter_wave_plate

        return half_wave_plate(self.hwp_deg).jones @ quarter_wave_plate(self.qwp_deg).jones


@dataclass
class SimConfig:
    label: BellLabel
    gamma: float
    eta: float = 1.0
    pulses: int = 100_000
    seed: int = 0
    bin_width: int = 200  # partner-count bin width for conditional histograms
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.label, str):
            self.label = BellLabel(self.label)
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("eta must be in (0, 1]")
        if self.pulses < 1:
            raise ValueError("need at least 1 pulse")
        if self.bin_width < 1:
            raise ValueError("bin width must be >= 1")


# -- block sampling ------------------------------------------------------------


def _block_generator(seed: int, run: int, series: int, block: int) -> np.random.Generator:
    """Counter-addressed stream: one Philox per (seed; block, series, run)."""
    key = np.random.SeedSequence(seed).generate_state(2, dtype=np.uint64)
    counter = np.array([0, block, series, run], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def _sample_series_counts(
    config: SimConfig, pairing: str, series: int, run: int
) -> np.ndarray:
    """Detected counts (pulses, 4) = (x_a, y_a, x_b, y_b) for one series."""
    pulses = config.pulses
    q = geometric_ratio(config.gamma)
    p_geom = 1.0 - q
    counts = np.empty((pulses, 4), dtype=np.int64)
    n_blocks = -(-pulses // BLOCK_PULSES)

    def fill(block: int) -> None:
        rng = _block_generator(config.seed, run, series, block)
        lo = block * BLOCK_PULSES
        hi = min(pulses, lo + BLOCK_PULSES)
        size = hi - lo
        n = rng.geometric(p_geom, size) - 1
        m = rng.geometric(p_geom, size) - 1
        if pairing == "cross":
            ideal = (n, m, m, n)
        elif pairing == "parallel":
            ideal = (n, m, n, m)
        else:
            raise ValueError(f"unknown pairing {pairing!r}")
        # fixed thinning order keeps the stream schedule-independent
        for col, arr in enumerate(ideal):
            counts[lo:hi, col] = rng.binomial(arr, config.eta)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            list(pool.map(fill, range(n_blocks)))
    else:
        for b in range(n_blocks):
            fill(b)
    return counts


# -- single-pulse view ----------------------------------------------------------


@dataclass(frozen=True)
class PulseRecord:
    """Detected counts of one pulse in the analyzer basis.

    ``counts`` holds (x_a, y_a, x_b, y_b): the two polarizing-splitter
    outputs per beam after the wave plates.  The per-beam readouts are
    the detector differences.
    """

    pulse_id: int
    counts: tuple[int, int, int, int]
    setting: MeasurementSetting

    @property
    def readout_a(self) -> int:
        return self.counts[0] - self.counts[1]

    @property
    def readout_b(self) -> int:
        return self.counts[2] - self.counts[3]

    @property
    def total(self) -> int:
        return int(sum(self.counts))


def sample_pulse(
    label: BellLabel,
    gamma: float,
    setting: MeasurementSetting,
    eta: float,
    rng: np.random.Generator,
    pulse_id: int = 0,
) -> PulseRecord:
    """One pulse through the closed-form sampling path.

    Draws the pair occupation (n, m) from the joint law
    ``lambda_n lambda_m``, assigns perfectly correlated raw counts per
    the state's pairing for the setting's Stokes component, then thins
    each mode independently with probability ``eta``.
    """
    if isinstance(label, str):
        label = BellLabel(label)
    comp = setting.component
    if comp is None:
        raise ValueError("setting does not realize a canonical Stokes component")
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must be in (0, 1]")
    q = geometric_ratio(gamma)
    n = int(rng.geometric(1.0 - q)) - 1
    m = int(rng.geometric(1.0 - q)) - 1
    pairing = PAIRING_TABLE[label][comp - 1]
    ideal = (n, m, m, n) if pairing == "cross" else (n, m, n, m)
    detected = tuple(int(rng.binomial(k, eta)) for k in ideal)
    return PulseRecord(pulse_id=pulse_id, counts=detected, setting=setting)


# -- witness estimation --------------------------------------------------------


def _jackknife_series(readout: np.ndarray, totals: np.ndarray):
    """One series' statistic theta = Var(readout) - (2/3) mean(totals).

    Returns (var, mean_total, theta, sigma_theta, sigma_var) with the
    errors from a delete-one-pulse jackknife, fully vectorized from the
    leave-one-out sums.
    """
    x = readout.astype(np.float64)
    t = totals.astype(np.float64)
    n = x.size
    S1, S2, T1 = x.sum(), float(x @ x), t.sum()
    mean_full = T1 / n
    var_full = (S2 - S1 * S1 / n) / (n - 1) if n > 1 else 0.0
    theta_full = var_full - (2.0 / 3.0) * mean_full
    if n < 3:
        return var_full, mean_full, theta_full, math.inf, math.inf

    m = n - 1.0
    s1 = S1 - x
    s2 = S2 - x * x
    t1 = T1 - t
    var_del = (s2 - s1 * s1 / m) / (m - 1.0)
    mean_del = t1 / m
    theta_del = var_del - (2.0 / 3.0) * mean_del
    sigma_theta = math.sqrt((n - 1) / n * np.sum((theta_del - theta_del.mean()) ** 2))
    sigma_var = math.sqrt((n - 1) / n * np.sum((var_del - var_del.mean()) ** 2))
    return var_full, mean_full, theta_full, sigma_theta, sigma_var


def estimate_witness(
    config: SimConfig,
    kind: WitnessKind | None = None,
    run: int = 0,
    pulse_log: str | None = None,
) -> WitnessReport:
    """Sampled witness value with jackknife errors.

    Three series (one Stokes component each, canonical settings); the
    reported value is sum_i [Var_i - (2/3) mean_i(total counts)], an
    unbiased estimate of sum Var(S_i^a + s_i S_i^b) - 2 <S_0> at the
    detected-photon level.
    """
    kind = kind or matched_witness(config.label)
    signs = kind.signs
    pairings = PAIRING_TABLE[config.label]
    log_fh = open(pulse_log, "w") if pulse_log else None

    variance_terms = []
    theta_sigmas = []
    var_sigmas = []
    degenerate = []
    theta_sum = 0.0
    mean_s0_acc = 0.0
    try:
        for series, (sign, pairing) in enumerate(zip(signs, pairings)):
            # counts always follow the state's own pairing; a mismatched witness
            # only changes the sign in the readout combination below
            counts = _sample_series_counts(config, pairing, series, run)
            readout = (counts[:, 0] - counts[:, 1]) + sign * (counts[:, 2] - counts[:, 3])
            totals = counts.sum(axis=1)
            var_full, mean_full, theta, s_theta, s_var = _jackknife_series(readout, totals)
            if var_full == 0.0 and mean_full == 0.0:
                degenerate.append(series + 1)
            variance_terms.append(var_full)
            theta_sigmas.append(s_theta)
            var_sigmas.append(s_var)
            theta_sum += theta
            mean_s0_acc += mean_full / 3.0
            if log_fh is not None:
                comp = series + 1
                h, qw = CANONICAL_SETTINGS[comp]
                setting = {"hwp_deg": h, "qwp_deg": qw, "component": comp}
                for j in range(config.pulses):
                    log_fh.write(json.dumps({
                        "pulse_id": series * config.pulses + j,
                        "setting": setting,
                        "counts": counts[j].tolist(),
                    }, separators=(",", ":")) + "\n")
    finally:
        if log_fh is not None:
            log_fh.close()

    if degenerate:
        log.warning("series %s returned zero variance and zero mean", degenerate)
    sigma = math.sqrt(sum(s * s for s in theta_sigmas))
    meta = {
        "source": "simulation",
        "label": config.label.value,
        "gamma": config.gamma,
        "eta": config.eta,
        "pulses": config.pulses,
        "seed": config.seed,
        "bin_width": config.bin_width,
        "workers": config.workers,
        "run": run,
    }
    if degenerate:
        meta["degenerate_series"] = degenerate
    return WitnessReport(
        kind=kind,
        value=float(theta_sum),
        variance_terms=tuple(variance_terms),
        mean_s0=float(mean_s0_acc),
        variance_errors=tuple(var_sigmas),
        value_error=float(sigma),
        meta=meta,
    )


def matched_witness(label: BellLabel) -> WitnessKind:
    return {
        BellLabel.PSI_MINUS: WitnessKind.W_S,
        BellLabel.PSI_PLUS: WitnessKind.W_T1,
        BellLabel.PHI_PLUS: WitnessKind.W_T2,
        BellLabel.PHI_MINUS: WitnessKind.W_T3,
    }[label]


def witness_under_loss(gamma: float, eta: float) -> float:
    """Detected-level matched witness at efficiency eta (exact, no cutoff).

    Each matched variance term is 4 eta (1 - eta) N0 of thinning noise
    and <S_0> drops to 4 eta N0, so the value is 4 eta N0 (1 - 3 eta):
    entanglement stays certified for eta > 1/3 at any gain.
    """
    n0 = mean_photons_per_mode(gamma)
    return 4.0 * eta * n0 * (1.0 - 3.0 * eta)


# -- exact count distributions (slow path / oracles) ---------------------------


def pairing_distribution(label: BellLabel, component: int, gamma: float, n_max: int):
    """Exact joint photocount probabilities for a canonical setting.

    Returns (support, probs): support rows are (x_a, y_a, x_b, y_b).
    """
    from .states import schmidt_spectrum

    lam = schmidt_spectrum(gamma, n_max)
    lam = lam / lam.sum()
    pairing = PAIRING_TABLE[label][component - 1]
    rows = []
    probs = []
    for n in range(n_max + 1):
        for m in range(n_max + 1):
            if pairing == "cross":
                rows.append((n, m, m, n))
            else:
                rows.append((n, m, n, m))
            probs.append(lam[n] * lam[m])
    return np.array(rows, dtype=np.int64), np.array(probs)


def analyzer_distribution(state: FourModeState, setting: MeasurementSetting):
    """Joint count probabilities straight from the transformed amplitudes.

    Rotates the state through the setting's plates on both beams and
    reads |amplitude|^2 in the H/V number basis -- the generic (slow)
    route the pairing table shortcuts.
    """
    from .basis import FourModeBasis
    from .polarization import BasisTransform, apply_transform

    tr = BasisTransform(kind="analyzer", target="both", jones=setting.jones())
    rotated = apply_transform(state, tr)
    basis = FourModeBasis(state.n_max)
    vec = rotated.dense(basis)
    probs = np.abs(vec) ** 2
    probs = probs / probs.sum()
    return basis.occupations().T.copy(), probs


def sample_analyzer_counts(
    state: FourModeState,
    setting: MeasurementSetting,
    pulses: int,
    rng: np.random.Generator,
    eta: float = 1.0,
) -> np.ndarray:
    """Sample (pulses, 4) detected counts through the generic slow path."""
    support, probs = analyzer_distribution(state, setting)
    idx = rng.choice(probs.size, size=pulses, p=probs)
    counts = support[idx]
    if eta < 1.0:
        counts = rng.binomial(counts, eta)
    return counts.astype(np.int64)


# -- photon-number correlation estimate ----------------------------------------


@dataclass
class FedorovEstimate:
    ratio: float            # four-mode: product of the two pair ratios
    ratio_h: float
    ratio_v: float
    marginal_width_h: float
    conditional_width_h: float
    marginal_width_v: float
    conditional_width_v: float
    convention: str
    meta: dict = field(default_factory=dict)


def _marginal_width(samples: np.ndarray, convention) -> float:
    from .measures import WidthConvention

    conv = WidthConvention(convention) if isinstance(convention, str) else convention
    if conv is WidthConvention.SQRT2_STDDEV:
        return math.sqrt(2.0) * float(samples.mean())
    return float(samples.std(ddof=1))


def _conditional_width(values: np.ndarray, partners: np.ndarray, bin_width: int) -> float:
    """Count-weighted std of values across binned partner counts, >= 1 count.

    Partner counts are grouped into intervals of ``bin_width``; the
    conditional histogram of ``values`` within each occupied interval
    contributes its standard deviation, weighted by occupancy.  Bins in
    the observed partner range with no usable statistics are skipped
    with a warning.  Perfect correlation concentrates each conditional
    on a point, so the width is floored at one count.
    """
    bins = partners // bin_width
    order = np.argsort(bins, kind="stable")
    b_sorted = bins[order]
    v_sorted = values[order].astype(np.float64)
    cuts = np.flatnonzero(np.diff(b_sorted)) + 1
    groups = np.split(v_sorted, cuts)
    total = 0.0
    weight = 0.0
    skipped = 0
    for grp in groups:
        if grp.size >= 2:
            total += grp.size * grp.std(ddof=1)
            weight += grp.size
        else:
            skipped += 1
    span = int(b_sorted[-1] - b_sorted[0]) + 1 if b_sorted.size else 0
    empty = span - len(groups)
    if skipped or empty > 0:
        log.warning(
            "conditional histograms: %d empty and %d singleton partner bin(s) skipped",
            max(empty, 0), skipped,
        )
    width = total / weight if weight > 0 else 0.0
    return max(width, 1.0)


def estimate_fedorov(
    config: SimConfig, convention="sqrt2-stddev", run: int = 0
) -> FedorovEstimate:
    """Width-ratio estimate from an H/V-basis photocounting series.

    The H-polarized count of beam a pairs with whichever beam-b mode
    the state correlates it to (cross: b_V, parallel: b_H); same for
    the V count.  The four-mode ratio is the product of the two pair
    ratios, each marginal width over conditional width, the latter
    floored at one bin.
    """
    pairing = PAIRING_TABLE[config.label][0]
    counts = _sample_series_counts(config, pairing, series=0, run=run)
    xa, ya, xb, yb = counts.T
    partner_h = yb if pairing == "cross" else xb
    partner_v = xb if pairing == "cross" else yb
    mw_h = _marginal_width(xa, convention)
    cw_h = _conditional_width(xa, partner_h, config.bin_width)
    mw_v = _marginal_width(ya, convention)
    cw_v = _conditional_width(ya, partner_v, config.bin_width)
    conv = convention if isinstance(convention, str) else convention.value
    return FedorovEstimate(
        ratio=(mw_h / cw_h) * (mw_v / cw_v),
        ratio_h=mw_h / cw_h,
        ratio_v=mw_v / cw_v,
        marginal_width_h=mw_h,
        conditional_width_h=cw_h,
        marginal_width_v=mw_v,
        conditional_width_v=cw_v,
        convention=conv,
        meta={
            "label": config.label.value,
            "gamma": config.gamma,
            "eta": config.eta,
            "pulses": config.pulses,
            "seed": config.seed,
            "bin_width": config.bin_width,
            "run": run,
        },
    )


# -- efficiency sweep -----------------------------------------------------------


@dataclass
class SweepPoint:
    eta: float
    value: float
    sigma: float
    certifies: bool  # value + 3 sigma < 0
    exact: float


@dataclass
class SweepResult:
    points: list[SweepPoint]
    #: smallest grid eta whose 3-sigma interval stays below zero; below
    #: it the interval includes zero and certification is lost
    certification_threshold: float | None
    #: interpolated eta where the estimated value itself changes sign
    zero_crossing: float | None


def efficiency_sweep(
    config: SimConfig, eta_grid, kind: WitnessKind | None = None
) -> SweepResult:
    """Witness estimates across detection efficiencies.

    Each grid point runs an independent three-series estimate (run
    index = grid position).  The certification threshold is the
    smallest sampled efficiency still resolving the witness below zero
    at three jackknife sigma; the zero crossing interpolates where the
    estimate itself changes sign (None if not bracketed).
    """
    etas = [float(e) for e in eta_grid]
    if any(not 0.0 < e <= 1.0 for e in etas):
        raise ValueError("efficiency grid must lie in (0, 1]")
    points = []
    for i, eta in enumerate(etas):
        cfg = SimConfig(
            label=config.label, gamma=config.gamma, eta=eta,
            pulses=config.pulses, seed=config.seed,
            bin_width=config.bin_width, workers=config.workers,
        )
        rep = estimate_witness(cfg, kind=kind, run=i)
        points.append(SweepPoint(
            eta=eta,
            value=rep.value,
            sigma=rep.value_error,
            certifies=bool(rep.value + 3.0 * rep.value_error < 0.0),
            exact=witness_under_loss(config.gamma, eta),
        ))
    certified = [p.eta for p in points if p.certifies]
    threshold = min(certified) if certified else None
    crossing = None
    for a, b in zip(points, points[1:]):
        if a.value >= 0.0 > b.value or a.value < 0.0 <= b.value:
            # linear interpolation of the sign change
            t = a.value / (a.value - b.value)
            crossing = a.eta + t * (b.eta - a.eta)
            break
    return SweepResult(points=points, certification_threshold=threshold,
                       zero_crossing=crossing)

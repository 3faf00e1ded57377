"""Calibration and copy-spelling runs, plus accuracy and bit-rate metrics.

A run is driven by a simulated 256 Hz sample clock. Each selection plays
``n_avg`` randomised blocks of the four tactile stimuli, sends every
trigger down the wire chain to the emulated exciters, synthesises the EEG
the subject would produce while attending the target finger, filters it
with state carried across selections, and classifies the per-code
averages.

Every random draw is derived from ``SessionConfig.seed`` through numpy
``SeedSequence`` spawn keys, so a run is reproducible from that one number.
"""
import csv
import io
import json
import math
import time
from collections import Counter
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from . import classify, dsp, stim, wire
from .errors import IntegrityError, InvalidParameterError
from .layout import EPOCH_MS, EPOCH_SAMPLES, FS, N_CODES, SOA_MS, SOA_SAMPLES
from .synth import SynthConfig, synthesize_run

# pre-stimulus rest at the start of every selection
LEAD_IN_SAMPLES = FS
PAPER_N_AVG = range(5, 9)
CALIBRATION, SPELLING = 0, 1

# subject, max accuracy, BPRR [bit/min] as published; n_avg found by
# inverting the bit-rate formula
TABLE1 = (
    (1, 1.00, 17.14, 7),
    (2, 0.75, 7.92, 6),
    (3, 0.50, 1.56, 8),
    (4, 0.50, 2.49, 5),
    (5, 0.75, 5.94, 8),
)


@dataclass(frozen=True)
class SessionConfig:
    n_avg: int = 8
    targets: tuple = (1, 2, 3, 4)
    classifier: str = "swlda"
    synth: SynthConfig = field(default_factory=SynthConfig)
    seed: int = 0
    n_calibration: int = 8
    soa_ms: int = SOA_MS
    epoch_ms: int = EPOCH_MS
    fs: int = FS
    n_codes: int = N_CODES

    def __post_init__(self):
        if (self.soa_ms, self.epoch_ms, self.fs, self.n_codes) != (SOA_MS, EPOCH_MS, FS, N_CODES):
            raise InvalidParameterError("soa_ms, epoch_ms, fs and n_codes are fixed at 250, 800, 256, 4")
        if self.n_avg < 1:
            raise InvalidParameterError("n_avg must be >= 1")
        if self.classifier not in ("swlda", "lda"):
            raise InvalidParameterError(f"unknown classifier {self.classifier!r}")
        targets = tuple(int(t) for t in self.targets)
        if any(t not in stim.CODES for t in targets):
            raise InvalidParameterError(f"targets must be codes 1..4, got {targets}")
        object.__setattr__(self, "targets", targets)

    @property
    def non_paper(self):
        """True when n_avg lies outside the published 5-8 range."""
        return self.n_avg not in PAPER_N_AVG


class SimClock:
    """Sample counter on the 256 Hz grid.

    With ``paced=True`` every advance also sleeps until wall time catches
    up; results are unaffected.
    """

    def __init__(self, start=0, paced=False):
        self.current_sample = int(start)
        self.paced = paced
        self._t0 = time.monotonic()
        self._origin = self.current_sample

    def advance(self, n):
        if n < 0:
            raise InvalidParameterError("clock cannot run backwards")
        self.current_sample += n
        if self.paced:
            due = self._t0 + (self.current_sample - self._origin) / FS
            time.sleep(max(0.0, due - time.monotonic()))
        return self.current_sample


def derive_seed(seed, *key):
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


def selection_samples(n_avg):
    """Length of one selection block: lead-in, all onsets, last epoch."""
    return LEAD_IN_SAMPLES + (N_CODES * n_avg - 1) * SOA_SAMPLES + EPOCH_SAMPLES


@dataclass
class _Pipeline:
    cfg: SessionConfig
    clock: SimClock = field(default_factory=SimClock)
    filt: dsp.FilterSpec = field(default_factory=dsp.default_filter)
    state: dsp.FilterState = None
    emulator: wire.ExciterEmulator = None

    def run_selection(self, attended, key):
        cfg = self.cfg
        codes = stim.gen_sequence(cfg.n_avg, derive_seed(cfg.seed, *key, 0))
        start = self.clock.current_sample
        events = stim.schedule_events(codes, start + LEAD_IN_SAMPLES)
        if self.emulator is not None:
            self._deliver(events)
        n = selection_samples(cfg.n_avg)
        synth_cfg = replace(cfg.synth, seed=derive_seed(cfg.seed, *key, 1))
        raw = synthesize_run(events, attended, synth_cfg, n, start)
        filtered, self.state = dsp.apply_filter(self.filt, raw, self.state)
        self.clock.advance(n)
        epochs = dsp.extract_epochs(filtered, events)
        for e in epochs:
            e.is_target = e.code == attended
        return events, epochs

    def _deliver(self, events):
        acks, log = wire.deliver(events, emulator=self.emulator)
        if acks != bytes([wire.ACK]) * len(events):
            raise IntegrityError(f"exciter answered {acks.hex()} for {len(events)} triggers")
        if [e.channel for e in log] != [ev.code - 1 for ev in events]:
            raise IntegrityError("exciter log does not match the stimulus order")
        counts = Counter(e.channel for e in log)
        if any(counts[ch] != self.cfg.n_avg for ch in range(N_CODES)):
            raise IntegrityError(f"per-channel burst counts {dict(counts)} != n_avg {self.cfg.n_avg}")


def _train(cfg, data):
    if cfg.classifier == "lda":
        return classify.train_lda(data)
    return classify.train_swlda(data)


def collect_calibration(cfg, n_selections=None):
    """Labelled, decimated single-trial epochs from a calibration run."""
    n_selections = cfg.n_calibration if n_selections is None else n_selections
    if n_selections < 2:
        raise InvalidParameterError("calibration needs at least 2 selections")
    pipe = _Pipeline(cfg)
    X, y, codes, groups = [], [], [], []
    for i in range(n_selections):
        attended = stim.CODES[i % N_CODES]
        _, epochs = pipe.run_selection(attended, (CALIBRATION, i))
        for e in epochs:
            X.append(dsp.decimate_epoch(e))
            y.append(1.0 if e.is_target else -1.0)
            codes.append(e.code)
            groups.append(i)
    return classify.TrainingSet(np.array(X), np.array(y), np.array(codes), np.array(groups))


def training_selection_accuracy(data, model):
    """Re-spell the calibration selections from their own averaged features.

    Averaging decimated single trials equals decimating the averaged
    epoch, so this matches what a spelling run would score.
    """
    hits = []
    for g in np.unique(data.groups):
        rows = data.groups == g
        X, y, codes = data.features[rows], data.labels[rows], data.codes[rows]
        averaged = {c: X[codes == c].mean(axis=0) for c in stim.CODES}
        target = int(codes[y > 0][0])
        hits.append(classify.select(model, averaged).chosen == target)
    return float(np.mean(hits))


def run_calibration(cfg, n_selections=None):
    """Calibration run attending codes 1, 2, 3, 4, 1, ... in turn.

    Returns ``(training_set, model)``; the classifier is ``cfg.classifier``.
    """
    data = collect_calibration(cfg, n_selections)
    return data, _train(cfg, data)


@dataclass
class SelectionRecord:
    target: int
    chosen: int
    scores: tuple
    n_avg: int
    n_events: int
    first_onset: int
    last_onset: int


@dataclass
class SessionReport:
    records: list
    accuracy: float
    bits_per_selection: float
    selection_time_s: float
    bprr_bits_per_min: float
    config: dict
    seed: int

    def to_dict(self):
        return _round(asdict(self))

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "target", "chosen", "score1", "score2", "score3", "score4"])
        for i, r in enumerate(self.records):
            w.writerow([i, r.target, r.chosen] + [f"{s:.5f}" for s in r.scores])
        return buf.getvalue()


def _round(obj, places=5):
    if isinstance(obj, float):
        return round(obj, places) + 0.0
    if isinstance(obj, dict):
        return {k: _round(v, places) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v, places) for v in obj]
    return obj


def config_echo(cfg):
    d = asdict(cfg)
    d["non_paper"] = cfg.non_paper
    return d


def run_copy_spelling(cfg, model):
    """Spell every code in ``cfg.targets`` with a trained model."""
    if model.n_features != dsp.N_FEATURES:
        raise InvalidParameterError(
            f"model expects {model.n_features} features, pipeline makes {dsp.N_FEATURES}")
    pipe = _Pipeline(cfg, emulator=wire.ExciterEmulator())
    records = []
    for i, target in enumerate(cfg.targets):
        events, epochs = pipe.run_selection(target, (SPELLING, i))
        averaged = {c: dsp.decimate_epoch(dsp.average_epochs(epochs, c)) for c in stim.CODES}
        res = classify.select(model, averaged)
        records.append(SelectionRecord(target, res.chosen, res.scores, cfg.n_avg,
                                       len(events), events[0].onset_sample,
                                       events[-1].onset_sample))
    return summarize(records, cfg)


def summarize(records, cfg):
    n_hit = sum(r.chosen == r.target for r in records)
    acc = n_hit / len(records) if records else 0.0
    bits = wolpaw_bits(acc, N_CODES)
    t_sel = selection_time(cfg.n_avg, cfg)
    return SessionReport(records, acc, bits, t_sel, bits * 60.0 / t_sel,
                         config_echo(cfg), cfg.seed)


def wolpaw_bits(p, n):
    """Bits per selection for accuracy ``p`` among ``n`` equiprobable choices.

    ``log2 n + p log2 p + (1 - p) log2((1 - p) / (n - 1))`` with
    ``0 log 0 = 0``. Below-chance accuracies are not clamped.
    """
    if n < 2:
        raise InvalidParameterError(f"need at least 2 classes, got {n}")
    if not 0.0 <= p <= 1.0:
        raise InvalidParameterError(f"accuracy {p} outside [0, 1]")
    bits = math.log2(n)
    if p > 0:
        bits += p * math.log2(p)
    if p < 1:
        bits += (1 - p) * math.log2((1 - p) / (n - 1))
    return bits


def selection_time(n_avg, cfg=None):
    """Seconds of stimulation per selection: n_avg blocks of 4 onsets at the SOA.

    The trailing epoch window after the last onset is not counted.
    """
    if n_avg < 1:
        raise InvalidParameterError("n_avg must be >= 1")
    soa = cfg.soa_ms if cfg is not None else SOA_MS
    n_codes = cfg.n_codes if cfg is not None else N_CODES
    return n_avg * n_codes * soa / 1000.0


def bprr(p, n, t_sel):
    if t_sel <= 0:
        raise InvalidParameterError(f"selection time must be > 0, got {t_sel}")
    return wolpaw_bits(p, n) * 60.0 / t_sel


def table1_rows():
    """Recompute the published per-subject bit rates.

    Returns dicts with the published and recomputed BPRR side by side.
    """
    rows = []
    for subject, acc, published, n_avg in TABLE1:
        t = selection_time(n_avg)
        rows.append({"subject": subject, "accuracy": acc, "n_avg": n_avg,
                     "selection_time_s": t, "bprr": bprr(acc, N_CODES, t),
                     "published": published})
    return rows


def simulate(cfg, p300_amps=(0.0, 2.0, 5.0, 10.0), n_avgs=(5, 6, 7, 8)):
    """Calibrate and spell once per (amplitude, n_avg) cell."""
    rows = []
    for amp in p300_amps:
        for n_avg in n_avgs:
            c = replace(cfg, n_avg=n_avg, synth=replace(cfg.synth, p300_amp=amp))
            _, model = run_calibration(c)
            rep = run_copy_spelling(c, model)
            rows.append({"p300_amp": amp, "n_avg": n_avg, "accuracy": rep.accuracy,
                         "bits_per_selection": rep.bits_per_selection,
                         "bprr": rep.bprr_bits_per_min})
    return rows


_SYNTH_KEYS = {f.name for f in fields(SynthConfig)}
_SESSION_KEYS = {f.name for f in fields(SessionConfig)} - {"synth"}


def parse_config(text, base=None):
    """Read flat ``key=value`` lines into a SessionConfig.

    Keys are SessionConfig or SynthConfig field names (the latter also
    accepted as ``synth.<name>``). Lists are comma separated.
    """
    base = base or SessionConfig()
    sess, syn = {}, {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameterError(f"config line {lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.removeprefix("synth.")
        if key in ("targets", "topography"):
            parsed = tuple((int if key == "targets" else float)(v) for v in val.split(",") if v.strip())
        elif key == "classifier":
            parsed = val
        elif key in _SESSION_KEYS or key == "seed":
            parsed = int(val)
        elif key in _SYNTH_KEYS:
            parsed = float(val)
        else:
            raise InvalidParameterError(f"config line {lineno}: unknown key {key!r}")
        if key in _SESSION_KEYS:
            sess[key] = parsed
        else:
            syn[key] = parsed
    synth = replace(base.synth, **syn)
    return replace(base, synth=synth, **sess)


def load_config(path, base=None):
    with open(path) as f:
        return parse_config(f.read(), base)

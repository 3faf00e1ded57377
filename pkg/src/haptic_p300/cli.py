"""Command-line front end: calibrate, spell, simulate, table1, wire-selftest."""
import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import session, wire
from .classify import SwldaModel
from .errors import HapticBCIError


def _common(p):
    p.add_argument("--seed", type=int, help="session seed (default 0)")
    p.add_argument("--config", type=Path, help="key=value session config file")
    p.add_argument("--out", type=Path, help="output path (default: stdout)")
    p.add_argument("--classifier", choices=("swlda", "lda"))
    p.add_argument("--n-avg", type=int, help="blocks (epochs per code) to average")
    p.add_argument("--snr", type=float,
                   help="P300 amplitude in units of the background RMS")


def build_parser():
    parser = argparse.ArgumentParser(prog="haptic-p300", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="run a calibration session and write the model JSON")
    _common(p)
    p.add_argument("--n-selections", type=int, help="calibration selections (default 8)")

    p = sub.add_parser("spell", help="copy-spell the configured targets")
    _common(p)
    p.add_argument("--model", type=Path, help="model JSON; calibrates first when omitted")
    p.add_argument("--targets", help="comma separated codes, e.g. 1,2,3,4")

    p = sub.add_parser("simulate", help="sweep P300 amplitude x n_avg")
    _common(p)
    p.add_argument("--amps", default="0,2,5,10", help="P300 amplitudes in uV")
    p.add_argument("--n-avgs", default="5,6,7,8")
    p.add_argument("--n-targets", type=int, default=20)

    p = sub.add_parser("table1", help="recompute the published BPRR rows")
    _common(p)

    p = sub.add_parser("wire-selftest", help="protocol round-trip and corruption scan")
    _common(p)
    p.add_argument("--n-events", type=int, default=10_000)
    return parser


def _config(args):
    cfg = session.load_config(args.config) if args.config else session.SessionConfig()
    over = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.classifier:
        over["classifier"] = args.classifier
    if args.n_avg is not None:
        over["n_avg"] = args.n_avg
    if getattr(args, "targets", None):
        over["targets"] = tuple(int(t) for t in args.targets.split(","))
    if args.snr is not None:
        if cfg.synth.noise_rms <= 0:
            raise HapticBCIError("--snr needs a non-zero noise_rms")
        over["synth"] = replace(cfg.synth, p300_amp=args.snr * cfg.synth.noise_rms)
    return replace(cfg, **over)


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _table(rows, out):
    if out is None:
        w = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(session._round(rows))
    else:
        with open(out, "w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(session._round(rows))


def cmd_calibrate(args):
    cfg = _config(args)
    data, model = session.run_calibration(cfg, args.n_selections)
    print(f"trained {model.meta['kind']} on {len(data.labels)} epochs, "
          f"{len(model.selected)} features", file=sys.stderr)
    _emit(json.dumps(model.to_dict(), indent=1) + "\n", args.out)
    return 0


def cmd_spell(args):
    cfg = _config(args)
    if args.model:
        model = SwldaModel.load(args.model)
    else:
        _, model = session.run_calibration(cfg)
    report = session.run_copy_spelling(cfg, model)
    _emit(report.to_json() + "\n", args.out)
    if args.out is not None:
        args.out.with_suffix(".csv").write_text(report.to_csv())
    print(f"accuracy {report.accuracy:.5f}  bprr {report.bprr_bits_per_min:.5f} bit/min",
          file=sys.stderr)
    return 0


def cmd_simulate(args):
    cfg = _config(args)
    amps = tuple(float(a) for a in args.amps.split(","))
    n_avgs = tuple(int(n) for n in args.n_avgs.split(","))
    targets = tuple((i % 4) + 1 for i in range(args.n_targets))
    _table(session.simulate(replace(cfg, targets=targets), amps, n_avgs), args.out)
    return 0


def cmd_table1(args):
    rows = session.table1_rows()
    _table(rows, args.out)
    return 0 if all(abs(r["bprr"] - r["published"]) <= 0.01 for r in rows) else 1


def cmd_wire_selftest(args):
    res = wire.selftest(args.n_events, args.seed or 0)
    _emit("".join(f"{k}: {v}\n" for k, v in res.items()), args.out)
    return 0 if res["undetected"] == 0 and res["roundtrip_failures"] == 0 else 1


COMMANDS = {"calibrate": cmd_calibrate, "spell": cmd_spell, "simulate": cmd_simulate,
            "table1": cmd_table1, "wire-selftest": cmd_wire_selftest}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (HapticBCIError, OSError, ValueError, KeyError) as exc:
        print(f"haptic-p300 {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

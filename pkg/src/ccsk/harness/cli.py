"""Command line entry point: ``ccsk <subcommand> [flags]``.

Exit status is 0 on success, 1 for invalid arguments or configuration and 2
for failures while running. ``--config FILE`` reads ``key = value`` lines
whose keys are flag names (``M``, ``snr``, ``channel`` ...); flags given on the
command line take precedence.
"""

from __future__ import annotations

import argparse
import logging
import sys

from ..channel import AWGN, RAYLEIGH2, ChannelConfig
from ..modem import ModemConfig
from ..validation import ParameterError
from .results import emit_results

log = logging.getLogger("ccsk")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def parse_grid(text: str) -> tuple[float, ...]:
    """``lo:step:hi`` (inclusive), ``a,b,c`` or a single value."""
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) == 2:
                return (parts[0], parts[1])
            lo, step, hi = parts
            if step <= 0 or hi < lo:
                raise ValueError
            n = int(round((hi - lo) / step))
            grid = tuple(round(lo + i * step, 10) for i in range(n + 1))
            if abs(grid[-1] - hi) > 1e-9:
                raise ValueError
            return grid
        return tuple(float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; expected lo:step:hi or a,b,c")


def parse_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; expected lo:hi")
    return lo, hi


def parse_ints(text: str) -> tuple[int, ...]:
    try:
        if ":" in text:
            lo, hi = (int(p) for p in text.split(":"))
            return tuple(range(lo, hi + 1))
        return tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}")


def read_config_file(path: str) -> dict[str, str]:
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key.lstrip("-").replace("-", "_")] = value
    return values


def _modem_flags(p, beta=True):
    p.add_argument("--M", type=int, default=4, help="constellation size (power of 2)")
    p.add_argument("--k", type=int, default=32, help="information segment length")
    if beta:
        p.add_argument("--beta", type=int, default=None, help="frame length (default M*k)")


def _net_flags(p):
    p.add_argument("--hidden", type=int, default=64, help="LSTM units per direction")
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--attention-dim", type=int, default=128)
    p.add_argument("--dropout", type=float, default=0.2)
    p.add_argument("--aux", choices=["zero", "delta", "square"], default="zero")


def _train_flags(p):
    p.add_argument("--train-snr", type=parse_range, default=None, metavar="LO:HI",
                   help="training Eb/N0 range in dB (default 12:14 AWGN, 14:16 Rayleigh)")
    p.add_argument("--dataset-size", type=int, default=200_000)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--patience", type=int, default=5)


def _common(p, channel_default=AWGN):
    p.add_argument("--config", default=None, help="key = value file of flag defaults")
    p.add_argument("--channel", choices=[AWGN, RAYLEIGH2], default=channel_default)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--out", default=None, help="output CSV path")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ccsk", description="Combined-chaotic-sequence M-ary CSK simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a neural window classifier")
    _common(p)
    _modem_flags(p)
    _net_flags(p)
    _train_flags(p)
    p.add_argument("--model", default=None, help="checkpoint path (default models/<channel>_k<k>.ccsk)")

    for name, helptext in (("ser", "SER/BER sweep over an Eb/N0 grid"),
                           ("misalign", "SER sweep for several receive-window offsets d")):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        _modem_flags(p)
        p.add_argument("--snr", type=parse_grid, default=(0.0, 10.0, 20.0), metavar="LO:STEP:HI")
        p.add_argument("--symbols", type=int, default=10_000, help="symbols per grid point")
        p.add_argument("--detector", choices=["nn", "residual"], default="residual")
        p.add_argument("--model", default=None)
        if name == "ser":
            p.add_argument("--d", type=int, default=0, help="misalignment in samples")
        else:
            p.add_argument("--d", type=parse_ints, default=(0, 1, 2, 3, 4, 5), metavar="D0:D1|a,b")

    p = sub.add_parser("dcsk", help="DCSK correlator BER baseline")
    _common(p, RAYLEIGH2)
    p.add_argument("--L", type=int, default=64, help="DCSK spreading factor (reference length)")
    p.add_argument("--snr", type=parse_grid, default=(0.0, 10.0, 20.0), metavar="LO:STEP:HI")
    p.add_argument("--symbols", type=int, default=10_000, help="bits per grid point")

    p = sub.add_parser("leakage", help="information leakage rate from error probabilities")
    p.add_argument("--config", default=None)
    p.add_argument("--pe", type=float, nargs="*", default=None, help="bit error probabilities")
    p.add_argument("--in", dest="inp", default=None, help="results CSV; leakage from its ber column")
    p.add_argument("--out", default=None)

    p = sub.add_parser("eve", help="legitimate vs self-labelled eavesdropper BER and leakage")
    _common(p, RAYLEIGH2)
    _modem_flags(p)
    _net_flags(p)
    _train_flags(p)
    p.add_argument("--snr", type=parse_grid, default=(10.0, 15.0, 20.0, 25.0, 30.0), metavar="LO:STEP:HI")
    p.add_argument("--symbols", type=int, default=10_000)
    p.add_argument("--label-source", choices=["self_estimated", "genie"], default="self_estimated")
    p.add_argument("--bootstrap", choices=["untrained", "random"], default="untrained")
    p.add_argument("--rounds", type=int, default=1)

    p = sub.add_parser("complexity", help="per-term MAC counts of the window classifier")
    p.add_argument("--config", default=None)
    p.add_argument("--k", type=int, default=128, help="window length T")
    _net_flags(p)
    return parser


def _parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            values = read_config_file(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config file: {exc}")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, raw in values.items():
            if key not in known:
                raise UsageError(f"unknown key {key!r} in config file")
            action = known[key]
            try:
                if action.nargs in ("*", "+"):
                    defaults[key] = [action.type(v) for v in raw.split()]
                elif action.const is True:
                    defaults[key] = raw.lower() in ("1", "true", "yes", "on")
                else:
                    defaults[key] = action.type(raw) if action.type else raw
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"config key {key!r}: {exc}")
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _net_config(args, k):
    from ..neural.config import NetConfig

    return NetConfig(window_length=k, hidden_units=args.hidden, attention_heads=args.heads,
                     attention_dim=args.attention_dim, dropout_p=args.dropout, aux_channel=args.aux)


def _training_config(args):
    from ..neural.config import TrainingConfig

    return TrainingConfig(dataset_size=args.dataset_size, batch_size=args.batch_size, learning_rate=args.lr,
                          max_epochs=args.epochs, patience=args.patience, train_snr_range_db=args.train_snr,
                          channel_kind=args.channel, seed=args.seed)


def _write(rows, out):
    if out:
        emit_results(rows, out)
    for r in rows:
        print(f"{r.detector:>16} {r.channel:>9} M={r.M} k={r.k} beta={r.beta} d={r.d} "
              f"Eb/N0={r.ebn0_db:6.2f} SER={r.ser:.5f} (+/-{r.ser_ci:.5f}) BER={r.ber:.5f}")


def cmd_train(args):
    from ..neural.data import generate_dataset
    from ..neural.training import train
    from ..neural.checkpoint import save_params
    from .sweeps import default_model_path

    modem = ModemConfig(args.M, args.k, args.beta)
    net_cfg = _net_config(args, args.k)
    tr_cfg = _training_config(args)
    ds = generate_dataset(tr_cfg.dataset_size - tr_cfg.dataset_size % 2, modem, ChannelConfig(args.channel),
                          tr_cfg, seed=args.seed)
    params, hist = train(ds.X, ds.y, net_cfg, tr_cfg, verbose=args.verbose)
    path = args.model or default_model_path(args.channel, args.k)
    save_params(params, path)
    for e in range(hist.epochs):
        print(f"epoch {e:3d} loss {hist.train_loss[e]:.4f} acc {hist.train_acc[e]:.4f} "
              f"val_loss {hist.val_loss[e]:.4f} val_acc {hist.val_acc[e]:.4f}")
    print(f"best epoch {hist.best_epoch}; saved {path}")


def cmd_ser(args, misalign=False):
    from .sweeps import ExperimentSpec, run_misalignment_sweep, run_ser_sweep

    d_grid = args.d if misalign else ()
    spec = ExperimentSpec(detector=args.detector, channel=args.channel, M=args.M, k=args.k, beta=args.beta,
                          ebn0_grid=args.snr, symbols_per_point=args.symbols,
                          d=0 if misalign else args.d, d_grid=d_grid, master_seed=args.seed,
                          output=args.out, model=args.model)
    rows = run_misalignment_sweep(spec) if misalign else run_ser_sweep(spec)
    _write(rows, args.out)


def cmd_dcsk(args):
    from .dcsk import DcskConfig, dcsk_baseline
    from .sweeps import ExperimentSpec

    spec = ExperimentSpec(channel=args.channel, M=2, k=2, ebn0_grid=args.snr,
                          symbols_per_point=args.symbols, master_seed=args.seed)
    _write(dcsk_baseline(spec, DcskConfig(args.L)), args.out)


def cmd_leakage(args):
    import csv

    from ..security import leakage_rate
    from .results import read_results

    pes = list(args.pe or [])
    if args.inp:
        pes.extend(r.ber for r in read_results(args.inp))
    if not pes:
        raise ParameterError("give --pe values or --in results.csv")
    pairs = [(pe, leakage_rate(pe)) for pe in pes]
    for pe, lk in pairs:
        print(f"pe={pe:.6g} leakage={lk:.6f}")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["pe", "leakage"])
            w.writerows((repr(pe), repr(lk)) for pe, lk in pairs)


def cmd_eve(args):
    from ..security import EavesdropperConfig, simulate_eavesdropper
    from .results import ResultRow

    modem = ModemConfig(args.M, args.k, args.beta)
    cfg = EavesdropperConfig(args.label_source, args.bootstrap, args.rounds)
    res = simulate_eavesdropper(cfg, modem, ChannelConfig(args.channel), _net_config(args, args.k),
                                _training_config(args), args.snr, args.symbols, args.seed)
    n, nb = args.symbols, res.bits
    rows = []
    for arm, sers, bers in (("legit-nn", res.legit_ser, res.legit_ber), ("eve-nn", res.eve_ser, res.eve_ber)):
        for e, s, b in zip(res.ebn0_db, sers, bers):
            rows.append(ResultRow.from_counts(arm, args.channel, modem.M, modem.k, modem.beta, 0, e, n,
                                              int(round(s * n)), nb, int(round(b * nb)), args.seed))
    _write(rows, args.out)
    for e, le, ll in zip(res.ebn0_db, res.eve_leakage, res.legit_leakage):
        print(f"Eb/N0={e:6.2f} leakage eve={le:.5f} legit={ll:.5f}")


def cmd_complexity(args):
    from ..neural.complexity import estimate_complexity

    est = estimate_complexity(_net_config(args, args.k))
    for name, value in est.as_rows():
        print(f"{name:>18} {value:>14,d}")


COMMANDS = {
    "train": cmd_train,
    "ser": cmd_ser,
    "misalign": lambda a: cmd_ser(a, misalign=True),
    "dcsk": cmd_dcsk,
    "leakage": cmd_leakage,
    "eve": cmd_eve,
    "complexity": cmd_complexity,
}


def main(argv=None) -> int:
    try:
        args = _parse(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(message)s")
    try:
        COMMANDS[args.command](args)
    except (ParameterError, ValueError) as exc:
        print(f"ccsk {args.command}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"ccsk {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``sternlab <command> ...``."""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from .algebra import WeightKind
from .attack import AttackConfig, attack_params, run_attack, run_negative_control, signing_oracle
from .fiatshamir import (
    decode_public_key,
    decode_secret_key,
    encode_public_key,
    encode_secret_key,
    encode_signature,
    keygen,
    sign,
    verify,
)
from .problems import sample_sd
from .protocol import (
    SchemeParams,
    SerializationError,
    Variant,
    cross_transcript_matches,
    exact_opening_distributions,
    scheme_for,
    seeded_opening_features,
    total_variation,
)
from .sizemodel import PRESET_CELLS, VERSIONS, emit_tables, table_cells

EXIT_OK, EXIT_REJECT, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def make_rng(seed):
    return random.SystemRandom() if seed is None else random.Random(seed)


def _scheme_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--variant", choices=[v.value for v in Variant], default="salted")
    p.add_argument("--n", type=int, default=24)
    p.add_argument("--k", type=int, default=12)
    p.add_argument("--w", type=int, default=6)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--metric", choices=["hamming", "lee"], default="hamming")
    p.add_argument("--rounds", type=int, default=0, help="0 picks the variant default")
    p.add_argument("--l-seed", type=int, default=128)
    p.add_argument("--l-comm", type=int, default=256)
    p.add_argument("--l-salt", type=int, default=256)


def _params(a) -> SchemeParams:
    return SchemeParams(Variant(a.variant), a.n, a.k, a.w, a.q, WeightKind(a.metric), a.rounds,
                        a.l_seed, a.l_comm, a.l_salt)


def _emit(a, report: dict, text: str) -> None:
    print(json.dumps(report, sort_keys=True) if a.json else text)


def _read_message(a) -> bytes:
    if a.message is not None:
        return a.message.encode()
    if a.input is None:
        raise UsageError("give the message with --message or --in")
    return Path(a.input).read_bytes()


def cmd_keygen(a) -> int:
    params = _params(a)
    kp = keygen(params, make_rng(a.rng_seed))
    pk_path = Path(a.pk_out or f"{a.out}.pub")
    Path(a.out).write_bytes(encode_secret_key(params, kp))
    pk_path.write_bytes(encode_public_key(params, kp.public))
    _emit(a, {"secret_key": str(a.out), "public_key": str(pk_path), "variant": params.variant.value,
              "rounds": params.rounds},
          f"wrote {a.out} and {pk_path}")
    return EXIT_OK


def cmd_sign(a) -> int:
    params, kp = decode_secret_key(Path(a.key).read_bytes())
    sig = encode_signature(params, sign(params, _read_message(a), kp, make_rng(a.rng_seed)))
    Path(a.out).write_bytes(sig)
    _emit(a, {"signature": str(a.out), "bytes": len(sig)}, f"wrote {a.out} ({len(sig)} bytes)")
    return EXIT_OK


def cmd_verify(a) -> int:
    params, pk = decode_public_key(Path(a.pk).read_bytes())
    verdict = verify(params, pk, _read_message(a), Path(a.sig).read_bytes())
    _emit(a, {"accepted": verdict.ok, "reason": verdict.reason, "malformed": verdict.malformed},
          "accepted" if verdict else f"rejected: {verdict.reason}")
    return EXIT_OK if verdict else EXIT_REJECT


def cmd_attack(a) -> int:
    cfg = AttackConfig(a.l_seed, a.rounds, a.iters)
    rng = make_rng(a.rng_seed)
    params = attack_params(cfg, a.n, a.k, a.w, a.q, salted=a.salted, l_comm=a.l_comm,
                           l_salt=a.l_salt, kind=WeightKind(a.metric))
    kp = sample_sd(params.n, params.k, params.w, params.q, params.kind, rng)
    oracle = signing_oracle(params, kp, rng)
    if a.salted:
        out = run_negative_control(cfg, oracle, kp.public, params, budget_factor=a.budget_factor)
    else:
        out = run_attack(cfg, oracle, kp.public, params)
    report = out.report(timing=a.timing)
    report.update({"variant": params.variant.value, "l_seed": cfg.l_seed, "rounds": cfg.rounds,
                   "q_s": cfg.q_s, "matches_planted": out.recovered_e == kp.secret if out.recovered else False})
    text = (f"recovered secret after {out.signatures_used} signatures ({out.iterations} iterations)"
            if out.recovered else
            f"no key recovered after {out.signatures_used} signatures; "
            f"{out.condition_pairs} condition pairs, {out.x2_collisions} x2 collisions")
    _emit(a, report, text)
    return EXIT_OK


def cmd_hvzk(a) -> int:
    rng = make_rng(a.rng_seed)
    variant = Variant(a.variant)
    report = {"variant": variant.value}
    if variant is Variant.GENERIC:
        kp = sample_sd(4, 2, 2, 2, WeightKind.HAMMING, rng)
        real, sim = exact_opening_distributions(kp.public, kp.secret)
        tv = total_variation(real, sim)
        report.update({"mode": "exact", "n": 4, "q": 2, "w": 2, "tv": str(tv)})
        text = f"exact total variation distance: {tv}"
    elif variant is Variant.TREE:
        raise UsageError("hvzk-test covers generic, vulnerable and salted")
    else:
        params = SchemeParams(variant, 8, 4, 3, 2, rounds=1, l_seed=a.l_seed)
        kp = sample_sd(8, 4, 3, 2, WeightKind.HAMMING, rng)
        real = seeded_opening_features(params, kp.public, kp.secret, rng, a.samples, False)
        sim = seeded_opening_features(params, kp.public, kp.secret, rng, a.samples, True)
        tvs = {str(c): total_variation(real[c], sim[c]) for c in (1, 2, 3)}
        multi = SchemeParams(variant, 24, 12, 6, 2, rounds=4, l_seed=16, l_comm=256)
        mkp = sample_sd(24, 12, 6, 2, WeightKind.HAMMING, rng)
        scheme = scheme_for(multi)
        honest = [scheme.respond(scheme.commit(mkp.public, mkp.secret, rng),
                                 [rng.randrange(3) + 1 for _ in range(multi.rounds)])
                  for _ in range(a.transcripts)]
        simulated = [scheme.simulate(mkp.public, rng) for _ in range(a.transcripts)]
        report.update({"mode": "sampled", "n": 8, "samples": a.samples, "tv": tvs,
                       "transcripts": a.transcripts,
                       "matches_real": cross_transcript_matches(multi, mkp.public, honest),
                       "matches_simulated": cross_transcript_matches(multi, mkp.public, simulated)})
        text = "\n".join([f"challenge {c}: empirical TV {tv:.4f}" for c, tv in tvs.items()]
                         + [f"cross-transcript matches: real {report['matches_real']}, "
                            f"simulated {report['matches_simulated']}"])
    _emit(a, report, text)
    return EXIT_OK


def _custom_cells(path: str) -> tuple[dict, dict]:
    with open(path, "rb") as fh:
        cfg = tomllib.load(fh)
    cells = {}
    for c in cfg.pop("cell", []):
        cells[int(c["q"])] = (int(c["n"]), int(c["k"]), int(c["w"]))
    if not cells:
        raise UsageError(f"{path} has no [[cell]] entries")
    extra = {k: int(cfg[k]) for k in ("l_seed", "l_comm", "l_salt", "groups", "rounds") if k in cfg}
    if "version" in cfg:
        extra["version"] = str(cfg["version"])
    return cells, extra


def cmd_sizes(a) -> int:
    if a.preset == "custom":
        if a.params is None:
            raise UsageError("--preset custom needs --params FILE")
        cells, extra = _custom_cells(a.params)
    else:
        cells, extra = dict(PRESET_CELLS), {}
    version = a.version or extra.pop("version", "hash-tree")
    extra.pop("version", None)
    versions = VERSIONS if version == "all" else (version,)
    for v in versions:
        if v not in VERSIONS:
            raise UsageError(f"unknown version {v!r}")
    tables = {v: table_cells(cells, v, **extra) for v in versions}
    if a.json:
        print(json.dumps(tables, sort_keys=True))
    else:
        print("\n".join(emit_tables(rows, a.format) for rows in tables.values()), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sternlab", description="Stern identification and signature lab")
    sub = ap.add_subparsers(dest="command", required=True)

    def command(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("--rng-seed", type=int, default=None)
        p.add_argument("--json", action="store_true")
        return p

    p = command("keygen", cmd_keygen, "generate a key pair")
    _scheme_flags(p)
    p.add_argument("--out", required=True, help="secret key file")
    p.add_argument("--pk-out", help="public key file (default: OUT.pub)")

    p = command("sign", cmd_sign, "sign a message")
    p.add_argument("--key", required=True, help="secret key file")
    p.add_argument("--in", dest="input", help="message file")
    p.add_argument("--message", help="message given inline")
    p.add_argument("--out", required=True, help="signature file")

    p = command("verify", cmd_verify, "verify a signature (exit 1 on rejection)")
    p.add_argument("--pk", required=True, help="public key file")
    p.add_argument("--in", dest="input", help="message file")
    p.add_argument("--message", help="message given inline")
    p.add_argument("--sig", required=True, help="signature file")

    p = command("attack", cmd_attack, "seed-collision key recovery (or the salted control)")
    p.add_argument("--l-seed", type=int, default=16)
    p.add_argument("--rounds", type=int, default=10)
    p.add_argument("--iters", type=int, default=50)
    p.add_argument("--salted", action="store_true", help="run against the salted scheme instead")
    p.add_argument("--budget-factor", type=int, default=100)
    p.add_argument("--n", type=int, default=24)
    p.add_argument("--k", type=int, default=12)
    p.add_argument("--w", type=int, default=6)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--metric", choices=["hamming", "lee"], default="hamming")
    p.add_argument("--l-comm", type=int, default=256)
    p.add_argument("--l-salt", type=int, default=256)
    p.add_argument("--timing", action="store_true", help="include wall time in the report")

    p = command("hvzk-test", cmd_hvzk, "compare honest and simulated openings")
    p.add_argument("--variant", choices=["generic", "vulnerable", "salted"], default="generic")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--transcripts", type=int, default=512)
    p.add_argument("--l-seed", type=int, default=128)

    p = command("sizes", cmd_sizes, "signature-size tables")
    p.add_argument("--preset", choices=["paper", "custom"], default="paper")
    p.add_argument("--params", help="TOML file with [[cell]] entries (q, n, k, w)")
    p.add_argument("--format", choices=["csv", "text"], default="text")
    p.add_argument("--version", choices=[*VERSIONS, "all"], default=None)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return a.func(a)
    except (UsageError, SerializationError, ValueError, OSError, tomllib.TOMLDecodeError, KeyError) as exc:
        print(f"sternlab {a.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Scenario runner.

Verbs:
  run    <scenario>  full session plus key-distillation pipeline
  sweep  <scenario>  CSV of simulated and analytic rates along one axis
  rates              closed-form rate table, no simulation
  bell   <scenario>  CHSH estimate from an entanglement scenario

Exit codes: 0 success with key, 2 protocol abort, 1 usage or config error.
Scenario files are JSON; keys starting with "_" are ignored (comments).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, replace
from importlib import resources
from typing import Optional

import numpy as np

from . import bell as bell_mod
from .adversary import EveStrategy, NO_EVE
from .postproc import FinalKeyResult, PipelineParams, run_pipeline
from .protocols import ProtocolConfig, SessionTranscript, run_session
from .quantum import (ChannelModel, DetectorModel, SourceModel,
                      channel_preset, detector_preset)
from .rates import RateReport, evaluate_rates
from .rng import derive_rng


class ConfigError(Exception):
    """Scenario validation failure; the message carries the field path."""


@dataclass
class Scenario:
    protocol_config: ProtocolConfig
    source: SourceModel
    channel: ChannelModel
    detector: DetectorModel
    eve: EveStrategy
    pipeline: PipelineParams
    seed: int


def _strip_comments(obj):
    if isinstance(obj, dict):
        return {k: _strip_comments(v) for k, v in obj.items()
                if not k.startswith("_")}
    return obj


def _take(section: dict, path: str, allowed: set) -> None:
    extra = set(section) - allowed
    if extra:
        raise ConfigError(f"{path}: unknown field(s) {sorted(extra)}")


def _parse_source(raw: Optional[dict]) -> SourceModel:
    if raw is None:
        return SourceModel.ideal()
    _take(raw, "source", {"kind", "mu", "herald_efficiency",
                          "multi_pair_prob"})
    kind = raw.get("kind", "ideal")
    try:
        if kind == "ideal":
            return SourceModel.ideal()
        if kind == "laser":
            return SourceModel.laser(float(raw["mu"]))
        if kind == "heralded":
            return SourceModel.heralded(float(raw["herald_efficiency"]),
                                        float(raw["multi_pair_prob"]))
    except KeyError as exc:
        raise ConfigError(f"source: missing field {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"source: {exc}") from None
    raise ConfigError(f"source.kind: unknown kind {kind!r}")


def _parse_channel(raw: Optional[dict]) -> ChannelModel:
    if raw is None:
        return ChannelModel()
    _take(raw, "channel", {"preset", "length_km", "attenuation_db_per_km",
                           "misalignment_error_prob"})
    try:
        if "preset" in raw:
            return channel_preset(
                raw["preset"], length_km=float(raw.get("length_km", 0.0)),
                misalignment_error_prob=float(
                    raw.get("misalignment_error_prob", 0.0)))
        return ChannelModel(
            length_km=float(raw.get("length_km", 0.0)),
            attenuation_db_per_km=float(raw.get("attenuation_db_per_km", 0.0)),
            misalignment_error_prob=float(
                raw.get("misalignment_error_prob", 0.0)))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"channel: {exc}") from None


def _parse_detector(raw: Optional[dict]) -> DetectorModel:
    if raw is None:
        return DetectorModel()
    _take(raw, "detector", {"preset", "efficiency", "dark_prob",
                            "double_click_policy"})
    overrides = {k: v for k, v in raw.items() if k != "preset"}
    try:
        if "preset" in raw:
            return detector_preset(raw["preset"], **overrides)
        return DetectorModel(**overrides)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"detector: {exc}") from None


def _parse_eve(raw: Optional[dict]) -> EveStrategy:
    if raw is None:
        return NO_EVE
    _take(raw, "eve", {"kind", "basis_policy", "fixed_basis", "tap_ratio",
                       "block_single_prob"})
    try:
        return EveStrategy(**raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"eve: {exc}") from None


def _parse_pipeline(raw: Optional[dict]) -> PipelineParams:
    if raw is None:
        return PipelineParams()
    _take(raw, "postproc", {"sample_fraction", "qber_abort_threshold",
                            "safety_bits", "eve_bound", "max_passes",
                            "subset_clean_target", "auth_prime"})
    try:
        return PipelineParams(**raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"postproc: {exc}") from None


def parse_scenario(raw: dict) -> Scenario:
    raw = _strip_comments(raw)
    _take(raw, "scenario", {"protocol", "num_pulses", "seed", "basis_bias",
                            "b92_overlap", "signal_mu", "decoy_mu",
                            "decoy_fraction", "source", "channel", "detector",
                            "eve", "postproc"})
    if "seed" not in raw:
        raise ConfigError("seed: required (no ambient randomness)")
    if "protocol" not in raw:
        raise ConfigError("protocol: required")
    if "num_pulses" not in raw:
        raise ConfigError("num_pulses: required")
    proto_kwargs = {k: raw[k] for k in ("basis_bias", "b92_overlap",
                                        "signal_mu", "decoy_mu",
                                        "decoy_fraction") if k in raw}
    try:
        cfg = ProtocolConfig(protocol=raw["protocol"],
                             num_pulses=int(raw["num_pulses"]), **proto_kwargs)
    except ValueError as exc:
        raise ConfigError(f"protocol: {exc}") from None
    return Scenario(protocol_config=cfg,
                    source=_parse_source(raw.get("source")),
                    channel=_parse_channel(raw.get("channel")),
                    detector=_parse_detector(raw.get("detector")),
                    eve=_parse_eve(raw.get("eve")),
                    pipeline=_parse_pipeline(raw.get("postproc")),
                    seed=int(raw["seed"]))


def load_scenario(path: str, seed: Optional[int] = None,
                  pulses: Optional[int] = None) -> Scenario:
    if path.startswith("bundled:"):
        name = path.split(":", 1)[1]
        text = resources.files("qkdsim.data").joinpath(
            f"scenarios/{name}").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    scenario = parse_scenario(raw)
    if seed is not None:
        scenario.seed = seed
    if pulses is not None:
        scenario.protocol_config = replace(scenario.protocol_config,
                                           num_pulses=pulses)
    return scenario


# ---------------------------------------------------------------------------
# report assembly
# ---------------------------------------------------------------------------

def _scenario_rates(scenario: Scenario, epsilon: float) -> RateReport:
    mu = None
    if scenario.source.kind == "attenuated_laser":
        mu = scenario.source.mu
    if scenario.protocol_config.protocol == "decoy_bb84":
        mu = scenario.protocol_config.signal_mu
    overlap = None
    if scenario.protocol_config.protocol == "b92":
        overlap = scenario.protocol_config.b92_overlap
    eta = scenario.channel.transmittance * scenario.detector.efficiency
    return evaluate_rates(epsilon=epsilon, mu=mu, eta=eta,
                          p_dark=scenario.detector.dark_prob, overlap=overlap)


def session_report(scenario: Scenario, transcript: SessionTranscript,
                   result: FinalKeyResult) -> dict:
    report = {
        "protocol": transcript.protocol,
        "seed": scenario.seed,
        "pulses": transcript.pulse_count,
        "detections": transcript.detection_count,
        "sifted_bits": len(transcript.sifted_alice),
        "sifted_fraction": transcript.sifted_fraction,
        "qber_sifted": transcript.qber,
        "eve_known_fraction": transcript.eve_known_fraction,
        "qber_estimate": result.qber_estimate,
        "leaked_bits": result.leaked_bits,
        "eve_bound_bits": result.eve_bound_bits,
        "final_length": result.final_length,
        "abort_stage": result.abort_stage,
        "abort_reason": result.abort_reason,
        "final_key_hex": (result.final_key.to_hex()
                          if result.final_key is not None else None),
    }
    if transcript.intensity_stats is not None:
        report["intensity_stats"] = transcript.intensity_stats
    if transcript.chsh_samples is not None:
        s_hat, stderr = bell_mod.chsh_estimate(transcript.chsh_samples,
                                               min_count=1)
        report["chsh"] = {"S": s_hat, "stderr": stderr,
                          "analytic_max": bell_mod.chsh_analytic(
                              bell_mod.MAXIMAL_SETTINGS)}
    return report


def _report_text(report: dict, rates: RateReport) -> str:
    lines = ["session report"]
    for key, val in report.items():
        if isinstance(val, dict):
            lines.append(f"  {key}:")
            for k2, v2 in val.items():
                lines.append(f"    {k2} = {v2!r}")
        else:
            lines.append(f"  {key} = {val!r}")
    lines.append(rates.to_text())
    return "\n".join(lines) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------

def cmd_run(args) -> int:
    scenario = load_scenario(args.scenario, args.seed, args.pulses)
    transcript = run_session(scenario.protocol_config, scenario.source,
                             scenario.channel, scenario.detector,
                             scenario.eve, derive_rng(scenario.seed, 0))
    result = run_pipeline(transcript, scenario.pipeline,
                          derive_rng(scenario.seed, 1))
    report = session_report(scenario, transcript, result)
    rates = _scenario_rates(scenario, result.qber_estimate)
    if args.format == "json":
        payload = dict(report)
        payload["rates"] = rates.values
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        text = _report_text(report, rates)
    _emit(text, args.out)
    return 0 if result.final_key is not None else 2


SWEEP_AXES = ("length_km", "mu", "epsilon")

SWEEP_CSV_HEADER = (["axis", "axis_value", "seed", "sifted_fraction",
                     "qber_sifted", "sim_key_rate_per_pulse"]
                    + [f"{c}_{suffix}" for c in RateReport.CSV_COLUMNS
                       for suffix in ("raw", "clamped")])


def _apply_axis(scenario: Scenario, axis: str, value: float) -> Scenario:
    if axis == "length_km":
        return replace(scenario,
                       channel=replace(scenario.channel, length_km=value))
    if axis == "mu":
        if scenario.protocol_config.protocol == "decoy_bb84":
            return replace(scenario, protocol_config=replace(
                scenario.protocol_config, signal_mu=value))
        if scenario.source.kind != "attenuated_laser":
            raise ConfigError("axis mu requires a laser source")
        return replace(scenario, source=SourceModel.laser(value))
    if axis == "epsilon":
        # drive the error rate through receiver misalignment
        return replace(scenario, channel=replace(
            scenario.channel, misalignment_error_prob=value))
    raise ConfigError(f"axis: unknown axis {axis!r}")


def cmd_sweep(args) -> int:
    base = load_scenario(args.scenario, args.seed, args.pulses)
    if args.steps < 1:
        raise ConfigError("steps: must be >= 1")
    if args.steps == 1:
        values = np.array([args.start])
    else:
        values = np.linspace(args.start, args.stop, args.steps)
    rows = [",".join(SWEEP_CSV_HEADER)]
    for i, value in enumerate(values):
        point = _apply_axis(base, args.axis, float(value))
        transcript = run_session(point.protocol_config, point.source,
                                 point.channel, point.detector, point.eve,
                                 derive_rng(base.seed, i, 0))
        result = run_pipeline(transcript, point.pipeline,
                              derive_rng(base.seed, i, 1))
        rate = result.final_length / transcript.pulse_count \
            if transcript.pulse_count else 0.0
        eps = result.qber_estimate if args.axis != "epsilon" else float(value)
        rates = _scenario_rates(point, eps)
        row = [args.axis, repr(float(value)), str(base.seed),
               repr(transcript.sifted_fraction), repr(transcript.qber),
               repr(rate)] + rates.csv_row()
        rows.append(",".join(row))
    _emit("\n".join(rows) + "\n", args.out)
    return 0


def cmd_rates(args) -> int:
    try:
        report = evaluate_rates(epsilon=args.epsilon, mu=args.mu,
                                eta=args.eta, p_dark=args.p_dark,
                                overlap=args.overlap)
    except ValueError as exc:
        raise ConfigError(f"rates: {exc}") from None
    if args.format == "csv":
        header = ",".join(f"{c}_{s}" for c in RateReport.CSV_COLUMNS
                          for s in ("raw", "clamped"))
        text = header + "\n" + ",".join(report.csv_row()) + "\n"
    elif args.format == "json":
        text = json.dumps({"params": {"epsilon": args.epsilon, "mu": args.mu,
                                      "eta": args.eta, "p_dark": args.p_dark,
                                      "overlap": args.overlap},
                           "values": report.values},
                          indent=2, sort_keys=True) + "\n"
    else:
        text = report.to_text() + "\n"
    _emit(text, args.out)
    return 0


def cmd_bell(args) -> int:
    scenario = load_scenario(args.scenario, args.seed, args.pulses)
    if scenario.protocol_config.protocol != "e91":
        raise ConfigError("protocol: bell requires an e91 scenario")
    transcript = run_session(scenario.protocol_config, scenario.source,
                             scenario.channel, scenario.detector,
                             scenario.eve, derive_rng(scenario.seed, 0))
    s_hat, stderr = bell_mod.chsh_estimate(transcript.chsh_samples,
                                           min_count=1)
    analytic = bell_mod.chsh_analytic(bell_mod.MAXIMAL_SETTINGS)
    payload = {
        "pairs": transcript.pulse_count,
        "S": s_hat,
        "stderr": stderr,
        "analytic_singlet": analytic,
        "tsirelson": bell_mod.TSIRELSON,
        "classical_limit": 2.0,
        "violates_classical": s_hat > 2.0,
    }
    if args.format == "json":
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        lines = ["chsh report"] + [f"  {k} = {v!r}" for k, v in payload.items()]
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qkdsim",
        description="Quantum key distribution simulator and rate calculator")
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p, scenario=True):
        if scenario:
            p.add_argument("scenario",
                           help="scenario file path, or bundled:<name>")
        p.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
        p.add_argument("--pulses", type=int, default=None,
                       help="override num_pulses")
        p.add_argument("--out", default=None, help="write the report here")

    p_run = sub.add_parser("run", help="run a session plus pipeline")
    common(p_run)
    p_run.add_argument("--format", choices=("text", "json"), default="text")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep one axis, emit CSV")
    common(p_sweep)
    p_sweep.add_argument("--axis", choices=SWEEP_AXES, required=True)
    p_sweep.add_argument("--start", type=float, required=True)
    p_sweep.add_argument("--stop", type=float, required=True)
    p_sweep.add_argument("--steps", type=int, required=True)
    p_sweep.add_argument("--format", choices=("csv",), default="csv")
    p_sweep.set_defaults(func=cmd_sweep)

    p_rates = sub.add_parser("rates", help="closed-form rates, no simulation")
    p_rates.add_argument("--epsilon", type=float, default=None)
    p_rates.add_argument("--mu", type=float, default=None)
    p_rates.add_argument("--eta", type=float, default=None)
    p_rates.add_argument("--p-dark", dest="p_dark", type=float, default=0.0)
    p_rates.add_argument("--overlap", type=float, default=None)
    p_rates.add_argument("--format", choices=("text", "csv", "json"),
                         default="text")
    p_rates.add_argument("--out", default=None)
    p_rates.set_defaults(func=cmd_rates)

    p_bell = sub.add_parser("bell", help="CHSH estimate from an e91 scenario")
    common(p_bell)
    p_bell.add_argument("--format", choices=("text", "json"), default="text")
    p_bell.set_defaults(func=cmd_bell)

    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

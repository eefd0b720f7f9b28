"""Experiment configuration documents: schema, validation, resolution.

Configs are JSON. Unknown keys are rejected everywhere with field-level
messages. A constant step size of "auto" resolves to half the suggested
smoothness-based step from the theory advisory; the resolved value is
recorded in the trace header.
"""

from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .aggregation import CE, CWTM, Mean, MultiKrum
from .agents import AgentRoster, FixedPoint, GaussianBlast, InlierCollusion, SignFlip
from .engine import ConstantStep, ExperimentConfig, HarmonicStep
from .errors import ConfigurationError
from .objectives import NoiseModel, ObjectiveKind, ProblemInstance, generate_instance
from .streams import RandomStream
from .theory import ConditionReport, TheoryConstants, check_conditions, estimate_constants, suggest_alpha

_DEFAULTS = {
    "seed": 0,
    "rounds": 50,
    "local_steps": 3,
    "rule": {"name": "ce"},
    "schedule": {"kind": "constant", "alpha": "auto"},
    "noise": {"sigma": 0.0, "minibatch": 1},
    "roster": {
        "n": 50,
        "byzantine": 0,
        "filter_f": None,
        "attack": {"name": "inlier_collusion", "scale": 0.9},
    },
    "instance": {
        "kind": "regression_sin",
        "d": 20,
        "l": 25,
        "data_scale": None,
        "planted": True,
    },
    "initial_model": "zeros",
}

_RULE_NAMES = {"ce", "multi_krum", "cwtm", "mean"}
_ATTACK_NAMES = {"sign_flip", "gaussian_blast", "fixed_point", "inlier_collusion"}


def _check_keys(doc: dict, allowed, where: str) -> None:
    unknown = set(doc) - set(allowed)
    if unknown:
        raise ConfigurationError(f"unknown keys in {where}: {sorted(unknown)}")


def _merged(user: dict, defaults: dict, where: str) -> dict:
    _check_keys(user, defaults, where)
    out = copy.deepcopy(defaults)
    for key, value in user.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict) and key not in ("rule", "attack"):
            out[key] = _merged(value, out[key], f"{where}.{key}")
        else:
            out[key] = copy.deepcopy(value)
    return out


def canonical_document(doc: dict) -> dict:
    """Fill defaults and normalize derived fields without resolving 'auto'."""
    _check_keys(doc, _DEFAULTS, "config")
    out = copy.deepcopy(_DEFAULTS)
    for key in ("seed", "rounds", "local_steps", "initial_model"):
        if key in doc:
            out[key] = copy.deepcopy(doc[key])
    for key in ("noise", "roster"):
        if key in doc:
            out[key] = _merged(doc[key], _DEFAULTS[key], key)
    if "schedule" in doc:
        sched = dict(doc["schedule"])
        kind = sched.get("kind", "constant")
        if kind == "constant":
            _check_keys(sched, {"kind", "alpha"}, "schedule")
            out["schedule"] = {"kind": "constant", "alpha": sched.get("alpha", "auto")}
        elif kind == "harmonic":
            _check_keys(sched, {"kind", "c"}, "schedule")
            out["schedule"] = {"kind": "harmonic", "c": sched.get("c")}
        else:
            raise ConfigurationError("schedule.kind must be 'constant' or 'harmonic'")
    if "rule" in doc:
        rule = dict(doc["rule"])
        _check_keys(rule, {"name", "m_select"}, "rule")
        if rule.get("name") not in _RULE_NAMES:
            raise ConfigurationError(f"rule.name must be one of {sorted(_RULE_NAMES)}")
        out["rule"] = rule
    if "instance" in doc:
        inst = dict(doc["instance"])
        if "path" in inst:
            _check_keys(inst, {"path"}, "instance")
            out["instance"] = inst
        else:
            out["instance"] = _merged(inst, _DEFAULTS["instance"], "instance")

    roster = out["roster"]
    byz = roster["byzantine"]
    if isinstance(byz, int):
        roster["byzantine"] = list(range(byz))
    elif isinstance(byz, list):
        roster["byzantine"] = sorted(int(i) for i in byz)
    else:
        raise ConfigurationError("roster.byzantine must be a count or a list of ids")
    if roster["filter_f"] is None:
        roster["filter_f"] = len(roster["byzantine"])
    attack = dict(roster["attack"])
    if attack.get("name") not in _ATTACK_NAMES:
        raise ConfigurationError(f"roster.attack.name must be one of {sorted(_ATTACK_NAMES)}")
    roster["attack"] = attack

    inst = out["instance"]
    if "path" not in inst and inst["data_scale"] is None:
        inst["data_scale"] = 1.0 / float(inst["l"]) ** 0.5
    return out


def _build_attack(doc: dict):
    name = doc["name"]
    if name == "sign_flip":
        _check_keys(doc, {"name", "scale"}, "attack")
        return SignFlip(scale=float(doc.get("scale", 1.0)))
    if name == "gaussian_blast":
        _check_keys(doc, {"name", "magnitude"}, "attack")
        return GaussianBlast(magnitude=float(doc.get("magnitude", 1e3)))
    if name == "fixed_point":
        _check_keys(doc, {"name", "target"}, "attack")
        return FixedPoint(target=np.asarray(doc.get("target", [0.0]), dtype=np.float64))
    _check_keys(doc, {"name", "scale"}, "attack")
    scale = float(doc.get("scale", 0.9))
    if not 0.0 < scale < 1.0:
        raise ConfigurationError("inlier_collusion scale must lie in (0, 1)")
    return InlierCollusion(scale=scale)


def _build_rule(doc: dict, n: int, filter_f: int):
    name = doc["name"]
    if name == "ce":
        return CE(f=filter_f)
    if name == "cwtm":
        return CWTM(f=filter_f)
    if name == "mean":
        return Mean()
    m_select = int(doc.get("m_select", n - filter_f))
    return MultiKrum(f=filter_f, m_select=m_select)


def _build_instance(doc: dict, n: int, stream: RandomStream, base_dir: str) -> ProblemInstance:
    if "path" in doc:
        path = doc["path"]
        if not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        return ProblemInstance.load(path)
    return generate_instance(
        kind=ObjectiveKind(doc["kind"]),
        n_agents=n,
        d=int(doc["d"]),
        l=int(doc["l"]),
        data_scale=float(doc["data_scale"]),
        stream=stream,
        planted=bool(doc["planted"]),
    )


@dataclass
class LoadedExperiment:
    experiment: ExperimentConfig
    document: dict  # canonical config document
    constants: Optional[TheoryConstants]
    report: Optional[ConditionReport]
    resolved_alpha: Optional[float] = None

    def snapshot(self) -> dict:
        """Config embedded in trace headers: canonical doc + resolved step."""
        snap = copy.deepcopy(self.document)
        if self.resolved_alpha is not None:
            snap["schedule"] = dict(snap["schedule"], alpha_resolved=self.resolved_alpha)
        return snap


def build_experiment(doc: dict, base_dir: str = ".") -> LoadedExperiment:
    doc = canonical_document(doc)
    seed = int(doc["seed"])
    stream = RandomStream(seed)

    roster_doc = doc["roster"]
    n = int(roster_doc["n"])
    roster = AgentRoster(
        n=n,
        byzantine_ids=frozenset(roster_doc["byzantine"]),
        filter_f=int(roster_doc["filter_f"]),
        attack=_build_attack(roster_doc["attack"]),
    )
    instance = _build_instance(doc["instance"], n, stream, base_dir)
    if instance.n_agents != n:
        raise ConfigurationError("instance N does not match roster.n")
    rule = _build_rule(doc["rule"], n, roster.filter_f)
    noise_doc = doc["noise"]
    noise = NoiseModel(sigma=float(noise_doc["sigma"]), minibatch_m=int(noise_doc["minibatch"]))

    local_steps = int(doc["local_steps"])
    sched_doc = doc["schedule"]
    constants = report = None
    if sched_doc["kind"] == "constant":
        alpha = sched_doc["alpha"]
        if alpha == "auto":
            constants = estimate_constants(instance, roster, noise.sigma, stream=stream)
            alpha = 0.5 * suggest_alpha(constants.L_hat, local_steps)
        else:
            alpha = float(alpha)
        schedule = ConstantStep(alpha=alpha)
    elif sched_doc["kind"] == "harmonic":
        if "c" not in sched_doc or sched_doc["c"] in (None, "auto"):
            raise ConfigurationError("harmonic schedule needs an explicit positive c")
        schedule = HarmonicStep(c=float(sched_doc["c"]))
        alpha = schedule.at(0)
    else:
        raise ConfigurationError("schedule.kind must be 'constant' or 'harmonic'")

    if constants is None:
        try:
            constants = estimate_constants(instance, roster, noise.sigma, stream=stream)
        except Exception:
            constants = None
    if constants is not None:
        report = check_conditions(constants, n, roster.filter_f, local_steps, alpha)

    init = doc["initial_model"]
    if init == "zeros":
        initial = None
    elif init == "planted":
        initial = instance.planted_optimum.copy()
    elif isinstance(init, list):
        initial = np.asarray(init, dtype=np.float64)
    else:
        raise ConfigurationError("initial_model must be 'zeros', 'planted', or a vector")

    experiment = ExperimentConfig(
        instance=instance,
        roster=roster,
        rule=rule,
        rounds=int(doc["rounds"]),
        local_steps=local_steps,
        schedule=schedule,
        noise=noise,
        root_seed=seed,
        initial_model=initial,
    )
    return LoadedExperiment(
        experiment=experiment,
        document=doc,
        constants=constants,
        report=report,
        resolved_alpha=alpha,
    )


def load_config(path: str) -> LoadedExperiment:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ConfigurationError(f"config {path}: top level must be an object")
    return build_experiment(doc, base_dir=os.path.dirname(os.path.abspath(path)))


def serialize_config(doc: dict) -> str:
    return json.dumps(canonical_document(doc), indent=2, sort_keys=True)

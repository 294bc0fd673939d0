"""Named cat-generation protocols and a small scriptable sequence runner."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .catstates import (CatState, ReflectionNoise, displace, measure_atom,
                        prepare_atom, product_coherent, reflect)

STEP_KINDS = ("prepare_atom", "reflect", "displace", "measure_atom")


@dataclass(frozen=True)
class ProtocolStep:
    """One scripted operation on the evolving atom-field state."""

    kind: str
    mode: Optional[str] = None
    atom: Optional[str] = None
    amount: Optional[complex] = None
    outcome: Optional[str] = None
    noise: Optional[ReflectionNoise] = None

    def __post_init__(self):
        if self.kind not in STEP_KINDS:
            raise ValueError(f"unknown step kind {self.kind!r}")
        required = {
            "prepare_atom": ("atom",),
            "reflect": ("mode",),
            "displace": ("mode", "amount"),
            "measure_atom": ("outcome",),
        }[self.kind]
        for name in required:
            if getattr(self, name) is None:
                raise ValueError(f"step {self.kind!r} requires {name!r}")

    def to_json(self) -> dict:
        doc = {"kind": self.kind}
        if self.mode is not None:
            doc["mode"] = self.mode
        if self.atom is not None:
            doc["atom"] = self.atom
        if self.amount is not None:
            doc["amount"] = [self.amount.real, self.amount.imag]
        if self.outcome is not None:
            doc["outcome"] = self.outcome
        if self.noise is not None:
            doc["noise"] = {"eta": self.noise.eta,
                            "xi0": [self.noise.xi0.real, self.noise.xi0.imag],
                            "xi1": [self.noise.xi1.real, self.noise.xi1.imag]}
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "ProtocolStep":
        noise = None
        if "noise" in doc and doc["noise"] is not None:
            nd = doc["noise"]
            noise = ReflectionNoise(
                eta=nd["eta"],
                xi0=complex(*nd.get("xi0", (0.0, 0.0))),
                xi1=complex(*nd.get("xi1", (0.0, 0.0))))
        amount = doc.get("amount")
        if amount is not None:
            amount = complex(amount[0], amount[1])
        return cls(kind=doc["kind"], mode=doc.get("mode"), atom=doc.get("atom"),
                   amount=amount, outcome=doc.get("outcome"), noise=noise)


@dataclass(frozen=True)
class ProtocolResult:
    """Final state plus the log of measurement outcomes and probabilities."""

    final_state: CatState
    outcome_log: tuple
    metadata: dict = field(default_factory=dict)

    def to_json(self, path=None):
        doc = {
            "final_state": self.final_state.to_json(),
            "outcome_log": [{"outcome": o, "probability": p}
                            for o, p in self.outcome_log],
            "metadata": self.metadata,
        }
        if path is None:
            return doc
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
        return doc


class ProtocolError(RuntimeError):
    """A script step failed; carries the step index."""


def run_script(steps: Sequence[ProtocolStep], initial: CatState) -> ProtocolResult:
    """Apply steps in order, logging every measurement."""
    state = initial
    log = []
    for i, step in enumerate(steps):
        try:
            if step.kind == "prepare_atom":
                state = prepare_atom(state, step.atom)
            elif step.kind == "reflect":
                state = reflect(state, step.mode, step.noise)
            elif step.kind == "displace":
                state = displace(state, step.mode, step.amount)
            else:
                prob, state = measure_atom(state, step.outcome)
                log.append((step.outcome, prob))
        except ValueError as exc:
            raise ProtocolError(f"step {i} ({step.kind}): {exc}") from exc
    return ProtocolResult(final_state=state, outcome_log=tuple(log))


def multipartite_cat(n: int, alpha: complex,
                     noise: Optional[ReflectionNoise] = None,
                     postselect: str = "+") -> ProtocolResult:
    """Bounce n coherent pulses off the cavity and measure the atom in {+,-}.

    The ideal postselected state is (|-alpha>^n +/- |alpha>^n) / norm.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    modes = tuple(f"p{i}" for i in range(n))
    state = product_coherent([alpha] * n, modes, atom="0")
    state = prepare_atom(state, "+")
    steps = [ProtocolStep("reflect", mode=m, noise=noise) for m in modes]
    steps.append(ProtocolStep("measure_atom", outcome=postselect))
    result = run_script(steps, state)
    meta = {"protocol": "multipartite", "n": n,
            "alpha": [alpha.real, alpha.imag], "postselect": postselect,
            "ideal": noise is None or noise == ReflectionNoise(0.0)}
    return ProtocolResult(result.final_state, result.outcome_log, meta)


def multipartite_cat_premeasure(n: int, alpha: complex,
                                noise: Optional[ReflectionNoise] = None) -> CatState:
    """The entangled atom-field state just before the atom measurement."""
    modes = tuple(f"p{i}" for i in range(n))
    state = prepare_atom(product_coherent([alpha] * n, modes, atom="0"), "+")
    for m in modes:
        state = reflect(state, m, noise)
    return state


def multidimensional_cat(rounds: int, alpha: complex,
                         noise: Optional[ReflectionNoise] = None) -> ProtocolResult:
    """Iterate [prepare |+>, reflect, measure |+>, displace by 2 alpha].

    One round yields (|-alpha> + |alpha>); each further round displaces by
    2 alpha and reflects again, doubling the number of coherent components
    (round 2 gives the four-component state on {-3a, -a, a, 3a}).
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    steps = []
    for r in range(rounds):
        steps.append(ProtocolStep("prepare_atom", atom="+"))
        steps.append(ProtocolStep("reflect", mode="p0", noise=noise))
        steps.append(ProtocolStep("measure_atom", outcome="+"))
        if r < rounds - 1:
            steps.append(ProtocolStep("displace", mode="p0", amount=2.0 * alpha))
    initial = product_coherent([alpha], ("p0",), atom="0")
    result = run_script(steps, initial)
    meta = {"protocol": "multidimensional", "rounds": rounds,
            "alpha": [complex(alpha).real, complex(alpha).imag],
            "ideal": noise is None or noise == ReflectionNoise(0.0)}
    return ProtocolResult(result.final_state, result.outcome_log, meta)

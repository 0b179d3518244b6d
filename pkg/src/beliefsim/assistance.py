"""Active assistance: which task-relevant objects does the person have wrong?"""

from __future__ import annotations

import json
import logging
import math
import subprocess
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional

from .belief import BeliefState, ObjectInstance
from .errors import UnknownActivity

log = logging.getLogger(__name__)

DEFAULT_TAU = 0.5

RelevanceMap = Mapping[str, frozenset[str]]


@dataclass(frozen=True)
class UnawareSet:
    objects: tuple[ObjectInstance, ...]
    threshold: float

    def ids(self) -> list[str]:
        return [o.id for o in self.objects]


@dataclass(frozen=True)
class NotifySet:
    objects: tuple[ObjectInstance, ...]
    activity: str

    def ids(self) -> list[str]:
        return [o.id for o in self.objects]


def parse_relevance_map(data: Mapping) -> dict[str, frozenset[str]]:
    table = data.get("activities", data)
    out: dict[str, frozenset[str]] = {}
    for activity, classes in table.items():
        classes = frozenset(classes)
        if not activity or not classes:
            raise ValueError(f"activity {activity!r} needs a name and at least one class")
        out[activity] = classes
    return out


def load_relevance_map(path: Optional[Path | str] = None) -> dict[str, frozenset[str]]:
    """Load an activity -> classes table; the bundled default when ``path`` is None."""
    if path is None:
        text = resources.files("beliefsim").joinpath("data/relevance.json").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return parse_relevance_map(json.loads(text))


def unaware_objects(robot: BeliefState, inferred: BeliefState, tau: float = DEFAULT_TAU) -> UnawareSet:
    """Robot-believed objects farther than ``tau`` from every same-class
    object in the inferred belief. Ordered by id."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    out = []
    for obj in robot.instances:
        nearest = min(
            (math.dist(obj.position, other.position) for other in inferred.by_class(obj.cls)),
            default=math.inf,
        )
        if nearest > tau:
            out.append(obj)
    return UnawareSet(tuple(sorted(out, key=lambda o: o.id)), tau)


def relevant_subset(unaware: UnawareSet, activity: str, relevance: RelevanceMap) -> NotifySet:
    if activity not in relevance:
        raise UnknownActivity(activity)
    wanted = relevance[activity]
    return NotifySet(tuple(o for o in unaware.objects if o.cls in wanted), activity)


def score_notifications(predicted: Iterable, truth: Iterable) -> tuple[float, float, float]:
    """Set-overlap precision, recall and F1 over instance ids."""
    pred = {getattr(o, "id", o) for o in getattr(predicted, "objects", predicted)}
    true = {getattr(o, "id", o) for o in getattr(truth, "objects", truth)}
    hit = len(pred & true)
    precision = hit / len(pred) if pred else 1.0
    recall = hit / len(true) if true else 1.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


# -- optional external reasoner --------------------------------------------

class ReasonerError(RuntimeError):
    pass


class ExternalReasoner:
    """Ask a subprocess which classes matter for an activity.

    One JSON record per line on stdin, one JSON record back on stdout::

        -> {"activity": "...", "classes": ["cup", "book"], "mode": "list"}
        <- {"classes": ["cup"]}

    ``list`` sends every candidate class at once, ``single`` sends them one
    at a time; ``single_binary`` additionally asks for no reasoning trace.
    """

    MODES = ("list", "single", "single_binary")

    def __init__(self, command: list[str], timeout: float = 10.0, mode: str = "list"):
        if mode not in self.MODES:
            raise ValueError(f"mode must be one of {self.MODES}")
        self.command = list(command)
        self.timeout = timeout
        self.mode = mode

    def _ask(self, activity: str, classes: list[str]) -> set[str]:
        request = {"activity": activity, "classes": classes, "mode": self.mode}
        if self.mode == "single_binary":
            request["reasoning"] = False
        try:
            proc = subprocess.run(
                self.command,
                input=json.dumps(request) + "\n",
                capture_output=True,
                text=True,
                timeout=self.timeout,
                check=False,
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise ReasonerError(f"reasoner failed: {exc}") from exc
        lines = [ln for ln in proc.stdout.splitlines() if ln.strip()]
        try:
            reply = json.loads(lines[0])
            picked = reply["classes"]
        except (IndexError, ValueError, KeyError, TypeError) as exc:
            raise ReasonerError(f"malformed reasoner reply: {proc.stdout[:200]!r}") from exc
        if not isinstance(picked, list) or not all(isinstance(c, str) for c in picked):
            raise ReasonerError("reasoner reply 'classes' must be a list of strings")
        return set(picked) & set(classes)

    def select(self, activity: str, classes: list[str]) -> set[str]:
        if self.mode == "list":
            return self._ask(activity, classes)
        picked: set[str] = set()
        for cls in classes:
            picked |= self._ask(activity, [cls])
        return picked


def select_notify(
    unaware: UnawareSet,
    activity: str,
    relevance: RelevanceMap,
    reasoner: Optional[ExternalReasoner] = None,
) -> NotifySet:
    """Rule-based selection, or the external reasoner when one is given.

    Reasoner failures fall back to the rule-based table.
    """
    if reasoner is None:
        return relevant_subset(unaware, activity, relevance)
    classes = sorted({o.cls for o in unaware.objects})
    try:
        picked = reasoner.select(activity, classes)
    except ReasonerError as exc:
        log.warning("%s; using the relevance table", exc)
        return relevant_subset(unaware, activity, relevance)
    return NotifySet(tuple(o for o in unaware.objects if o.cls in picked), activity)

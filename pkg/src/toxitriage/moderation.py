"""Moderator actions, reporting decision trees, and report outcomes.

Every message gets at most one terminal action (respond / report / ignore);
acting removes it from its pool and appends an immutable record to the
ledger. Reports track a platform or police channel and a PENDING ->
REMOVED / RETAINED outcome that can be set exactly once.

The ledger is an append-only JSON Lines file: replaying it at startup
rebuilds the full in-memory state, so no database is needed. Decision trees
are data (JSON), validated for acyclicity and completeness at load, and
walked statelessly one answer at a time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from .responder import Response

ACTIONS = ("RESPOND", "REPORT", "IGNORE")
REPORT_CHANNELS = ("PLATFORM", "POLICE")
REPORT_OUTCOMES = ("PENDING", "REMOVED", "RETAINED")
TERMINALS = ("REPORT_PLATFORM", "REPORT_POLICE", "RESPOND", "IGNORE")


class ConflictError(RuntimeError):
    """The message or report was already acted on."""


class NotFoundError(LookupError):
    pass


class TreeError(ValueError):
    pass


class InvalidOptionError(ValueError):
    def __init__(self, label: str, valid: list[str]):
        self.label = label
        self.valid = valid
        super().__init__(f"option {label!r} not among {valid}")


@dataclass(frozen=True)
class ActionRecord:
    id: str
    message_id: str
    action: str
    payload: str | None  # response id or report id
    actor: str
    at: datetime

    def to_dict(self) -> dict:
        return {"id": self.id, "message_id": self.message_id,
                "action": self.action, "payload": self.payload,
                "actor": self.actor, "at": self.at.isoformat()}

    @classmethod
    def from_dict(cls, doc: dict) -> "ActionRecord":
        return cls(doc["id"], doc["message_id"], doc["action"],
                   doc.get("payload"), doc["actor"],
                   datetime.fromisoformat(doc["at"]))


@dataclass
class ReportRecord:
    id: str
    message_id: str
    reported_at: datetime
    channel: str
    outcome: str = "PENDING"
    outcome_at: datetime | None = None

    def to_dict(self) -> dict:
        return {"id": self.id, "message_id": self.message_id,
                "reported_at": self.reported_at.isoformat(),
                "channel": self.channel, "outcome": self.outcome,
                "outcome_at": self.outcome_at.isoformat() if self.outcome_at else None}

    @classmethod
    def from_dict(cls, doc: dict) -> "ReportRecord":
        return cls(doc["id"], doc["message_id"],
                   datetime.fromisoformat(doc["reported_at"]), doc["channel"],
                   doc.get("outcome", "PENDING"),
                   datetime.fromisoformat(doc["outcome_at"]) if doc.get("outcome_at") else None)


# -- decision trees -------------------------------------------------------

@dataclass(frozen=True)
class TreeNode:
    question: str
    options: dict[str, str]  # label -> node id or terminal


@dataclass(frozen=True)
class DecisionTree:
    id: str
    language: str
    root: str
    nodes: dict[str, TreeNode]


def load_tree(source: str | Path | dict) -> DecisionTree:
    """Parse and validate a decision tree.

    Checks: root exists, every option points to a known node or a terminal,
    no cycles, every node reachable, every path ends in a terminal.
    """
    if isinstance(source, (str, Path)):
        doc = json.loads(Path(source).read_text(encoding="utf-8"))
    else:
        doc = source
    nodes = {}
    for node_id, spec in doc.get("nodes", {}).items():
        options = dict(spec.get("options", {}))
        if not options:
            raise TreeError(f"node {node_id!r} has no options (non-terminal leaf)")
        nodes[node_id] = TreeNode(spec.get("q", ""), options)
    root = doc.get("root")
    if root not in nodes:
        raise TreeError(f"root {root!r} is not a node")
    for node_id, node in nodes.items():
        for label, target in node.options.items():
            if target not in nodes and target not in TERMINALS:
                raise TreeError(
                    f"node {node_id!r} option {label!r} references missing node {target!r}")
    # cycle check: DFS with colors
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {nid: WHITE for nid in nodes}

    def visit(nid: str):
        color[nid] = GRAY
        for target in nodes[nid].options.values():
            if target in nodes:
                if color[target] == GRAY:
                    raise TreeError(f"cycle through node {target!r}")
                if color[target] == WHITE:
                    visit(target)
        color[nid] = BLACK

    visit(root)
    unreachable = [nid for nid, c in color.items() if c == WHITE]
    if unreachable:
        raise TreeError(f"unreachable node(s): {', '.join(sorted(unreachable))}")
    return DecisionTree(doc.get("id", ""), str(doc.get("lang", "")).lower(),
                        root, nodes)


@dataclass(frozen=True)
class WalkResult:
    terminal: str | None = None
    node_id: str | None = None
    question: str | None = None
    options: tuple[str, ...] = ()

    @property
    def done(self) -> bool:
        return self.terminal is not None


def walk(tree: DecisionTree, answers: list[str]) -> WalkResult:
    """Consume answers from the root; return the terminal or next question."""
    current = tree.root
    for label in answers:
        node = tree.nodes[current]
        if label not in node.options:
            raise InvalidOptionError(label, sorted(node.options))
        target = node.options[label]
        if target in TERMINALS:
            return WalkResult(terminal=target)
        current = target
    node = tree.nodes[current]
    return WalkResult(node_id=current, question=node.question,
                      options=tuple(node.options))


# -- ledger ---------------------------------------------------------------

class Ledger:
    """Append-only store of actions, responses, reports, and engagement.

    If ``path`` is given, every append is also written as one JSON line; the
    file replays at construction to rebuild state after a restart.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self.actions: list[ActionRecord] = []
        self.responses: dict[str, Response] = {}
        self.reports: dict[str, ReportRecord] = {}
        self.events: list[dict] = []
        self._acted: set[str] = set()
        if self.path and self.path.exists():
            self._replay()

    def _replay(self):
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                doc = json.loads(line)
                kind, body = doc["kind"], doc["body"]
                if kind == "action":
                    rec = ActionRecord.from_dict(body)
                    self.actions.append(rec)
                    self._acted.add(rec.message_id)
                elif kind == "response":
                    resp = Response.from_dict(body)
                    self.responses[resp.id] = resp
                elif kind == "report":
                    rep = ReportRecord.from_dict(body)
                    self.reports[rep.id] = rep
                elif kind == "outcome":
                    rep = self.reports[body["report_id"]]
                    rep.outcome = body["outcome"]
                    rep.outcome_at = datetime.fromisoformat(body["at"])
                elif kind == "event":
                    self.events.append(body)

    def _persist(self, kind: str, body: dict):
        if self.path is None:
            return
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps({"kind": kind, "body": body},
                                ensure_ascii=False) + "\n")

    def has_acted(self, message_id: str) -> bool:
        return message_id in self._acted

    def add_response(self, response: Response):
        self.responses[response.id] = response
        self._persist("response", response.to_dict())

    def add_report(self, report: ReportRecord):
        self.reports[report.id] = report
        self._persist("report", report.to_dict())

    def record_action(self, message_id: str, action: str,
                      payload: str | None, actor: str, at: datetime,
                      pool=None, record_id: str | None = None) -> ActionRecord:
        """Append one terminal action; removes the message from its pool."""
        if action not in ACTIONS:
            raise ValueError(f"unknown action {action!r}")
        if message_id in self._acted:
            raise ConflictError(f"message {message_id} was already acted on")
        if action == "IGNORE" and payload:
            raise ValueError("IGNORE takes no payload")
        if action == "RESPOND" and not payload:
            raise ValueError("RESPOND needs a response id payload")
        if action == "REPORT" and not payload:
            raise ValueError("REPORT needs a report id payload")
        if record_id is None:
            record_id = f"act-{len(self.actions) + 1:06d}"
        rec = ActionRecord(record_id, message_id, action, payload, actor, at)
        self.actions.append(rec)
        self._acted.add(message_id)
        self._persist("action", rec.to_dict())
        if pool is not None:
            pool.remove(message_id)
        return rec

    def update_report_outcome(self, report_id: str, outcome: str,
                              at: datetime) -> ReportRecord:
        """Resolve a PENDING report exactly once."""
        if outcome not in ("REMOVED", "RETAINED"):
            raise ValueError(f"invalid outcome {outcome!r}")
        report = self.reports.get(report_id)
        if report is None:
            raise NotFoundError(f"no report {report_id!r}")
        if report.outcome != "PENDING":
            raise ConflictError(f"report {report_id} already resolved "
                                f"as {report.outcome}")
        report.outcome = outcome
        report.outcome_at = at
        self._persist("outcome", {"report_id": report_id, "outcome": outcome,
                                  "at": at.isoformat()})
        return report

    def add_event(self, event: dict):
        """Engagement event: {response_id, kind: LIKE|REPLY, at}."""
        self.events.append(event)
        self._persist("event", event)

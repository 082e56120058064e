"""Accounting ledger, run reports and their CSV/JSON/table renderings."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, fields
from enum import Enum

from .errors import ConfigMismatch
from .model import CellId, GroundTruth

CSV_COLUMNS = (
    "arch", "strategy", "pf", "seed",
    "published", "published_true", "published_false",
    "sent_true", "sent_false", "queued", "lost", "delivered",
    "dt_cert", "dt_uncert", "df_cert", "df_uncert",
    "remain_true", "false_to_true", "remain_false", "true_to_false",
)
COUNTERS = CSV_COLUMNS[4:]


class Mutation(Enum):
    REMAIN_TRUE = "remain_true"
    FALSE_TO_TRUE = "false_to_true"
    REMAIN_FALSE = "remain_false"
    TRUE_TO_FALSE = "true_to_false"


def classify_mutation(g: GroundTruth, sent_claim: CellId) -> Mutation:
    was_true = g.claimed_cell == g.true_cell
    is_true = sent_claim == g.true_cell
    if was_true:
        return Mutation.REMAIN_TRUE if is_true else Mutation.TRUE_TO_FALSE
    return Mutation.FALSE_TO_TRUE if is_true else Mutation.REMAIN_FALSE


@dataclass
class RunReport:
    arch: str
    strategy: str = "-"
    pf: float = 0.0
    seed: str = ""
    published: float = 0
    published_true: float = 0
    published_false: float = 0
    sent_true: float = 0
    sent_false: float = 0
    queued: float = 0
    lost: float = 0
    delivered: float = 0
    dt_cert: float = 0
    dt_uncert: float = 0
    df_cert: float = 0
    df_uncert: float = 0
    # certified notifications by claim mutation (collaborative only)
    remain_true: float = 0
    false_to_true: float = 0
    remain_false: float = 0
    true_to_false: float = 0
    # uncertified notifications by claim mutation (collaborative only)
    uncert_remain_true: float = 0
    uncert_remain_false: float = 0
    # not part of the emitted counters
    in_flight: float = 0
    pending_send: float = 0
    config_id: str = field(default="", compare=False)

    @property
    def label(self):
        return self.arch if self.strategy == "-" else f"{self.arch}-{self.strategy}"

    def counters(self):
        return {k: getattr(self, k) for k in COUNTERS}

    def identity_errors(self):
        """Ledger conservation identities; an empty list means they all hold."""
        errs = []
        sent = self.sent_true + self.sent_false
        if self.published != self.published_true + self.published_false:
            errs.append("published != published_true + published_false")
        if self.published != sent + self.pending_send:
            errs.append("published != sent_true + sent_false (+ pending polls)")
        if self.published != self.queued + self.lost + self.delivered + self.in_flight + self.pending_send:
            errs.append("published != queued + lost + delivered (+ in flight, pending)")
        if self.delivered != self.dt_cert + self.dt_uncert + self.df_cert + self.df_uncert:
            errs.append("delivered != sum of certification classes")
        if self.arch == "collaborative":
            cert = self.dt_cert + self.df_cert
            uncert = self.dt_uncert + self.df_uncert
            if cert != self.remain_true + self.false_to_true + self.remain_false + self.true_to_false:
                errs.append("certified != sum of mutation classes")
            if uncert != self.uncert_remain_true + self.uncert_remain_false:
                errs.append("uncertified != remain_true + remain_false")
        return errs


# -- ledger events ---------------------------------------------------------------

@dataclass(frozen=True)
class Published:
    key: tuple
    time: int
    truth: GroundTruth
    counted: bool = True


@dataclass(frozen=True)
class Sent:
    key: tuple
    claim: CellId


@dataclass(frozen=True)
class Queued:
    key: tuple


@dataclass(frozen=True)
class Flushed:
    key: tuple


@dataclass(frozen=True)
class Lost:
    key: tuple


@dataclass(frozen=True)
class Delivered:
    key: tuple
    claim: CellId
    certified: bool
    broker: int
    cause: str = ""


LedgerEvent = Published | Sent | Queued | Flushed | Lost | Delivered


@dataclass
class NotificationAudit:
    producer: int
    seq: int
    created_at: int
    true_cell: CellId
    claim_at_publish: CellId
    claim_at_send: CellId | None = None
    first_outcome: str = ""
    outcome: str = ""
    verdict: bool | None = None
    broker: int | None = None
    cause: str = ""

    def as_row(self):
        return {
            "producer": self.producer,
            "seq": self.seq,
            "created_at": self.created_at,
            "true_cell": str(self.true_cell),
            "claim_at_publish": str(self.claim_at_publish),
            "claim_at_send": "" if self.claim_at_send is None else str(self.claim_at_send),
            "first_outcome": self.first_outcome,
            "outcome": self.outcome,
            "verdict": "" if self.verdict is None else str(self.verdict).lower(),
            "broker": "" if self.broker is None else self.broker,
            "cause": self.cause,
        }


class Ledger:
    """Counts counted notifications through publish, send, queue, loss and delivery."""

    def __init__(self, arch, strategy="-", pf=0.0, seed="", track_mutations=False, check_every=0):
        self.report = RunReport(arch=arch, strategy=strategy, pf=pf, seed=str(seed))
        self.truth = {}
        self.audit = {}
        self.track_mutations = track_mutations
        self._queued = set()
        self._check_every = check_every
        self._events = 0

    def is_counted(self, key):
        return key in self.truth

    def record(self, event: LedgerEvent) -> None:
        r = self.report
        if isinstance(event, Published):
            if not event.counted:
                return
            if event.key in self.truth:
                raise ValueError(f"notification {event.key} published twice")
            t = event.truth
            self.truth[event.key] = t
            r.published += 1
            if t.claimed_cell == t.true_cell:
                r.published_true += 1
            else:
                r.published_false += 1
            r.pending_send += 1
            self.audit[event.key] = NotificationAudit(
                event.key[0], event.key[1], event.time, t.true_cell, t.claimed_cell
            )
        elif event.key not in self.truth:
            return
        elif isinstance(event, Sent):
            t = self.truth[event.key]
            if event.claim == t.true_cell:
                r.sent_true += 1
            else:
                r.sent_false += 1
            r.pending_send -= 1
            r.in_flight += 1
            self.audit[event.key].claim_at_send = event.claim
        elif isinstance(event, Queued):
            r.in_flight -= 1
            r.queued += 1
            self._queued.add(event.key)
            self._disposition(event.key, "queued")
        elif isinstance(event, Flushed):
            self._queued.discard(event.key)
            r.queued -= 1
            r.in_flight += 1
        elif isinstance(event, Lost):
            r.in_flight -= 1
            r.lost += 1
            self._disposition(event.key, "lost")
        elif isinstance(event, Delivered):
            self._delivered(event)
        self._events += 1
        if self._check_every and self._events % self._check_every == 0:
            errs = r.identity_errors()
            if errs:
                raise AssertionError(f"ledger identities broken mid-run: {errs}")

    def _disposition(self, key, outcome):
        a = self.audit[key]
        if not a.first_outcome:
            a.first_outcome = outcome
        a.outcome = outcome

    def _delivered(self, ev: Delivered):
        r = self.report
        t = self.truth[ev.key]
        r.in_flight -= 1
        r.delivered += 1
        truthful = ev.claim == t.true_cell
        if truthful and ev.certified:
            r.dt_cert += 1
        elif truthful:
            r.dt_uncert += 1
        elif ev.certified:
            r.df_cert += 1
        else:
            r.df_uncert += 1
        if self.track_mutations:
            m = classify_mutation(t, ev.claim)
            if ev.certified:
                setattr(r, m.value, getattr(r, m.value) + 1)
            elif m is Mutation.REMAIN_TRUE:
                r.uncert_remain_true += 1
            elif m is Mutation.REMAIN_FALSE:
                r.uncert_remain_false += 1
            else:
                raise AssertionError(f"uncertified notification {ev.key} had its claim mutated")
        a = self.audit[ev.key]
        self._disposition(ev.key, "delivered")
        a.verdict = ev.certified
        a.broker = ev.broker
        a.cause = ev.cause


def record(ledger: Ledger, event: LedgerEvent) -> None:
    ledger.record(event)


# -- aggregation -----------------------------------------------------------------

def aggregate(reports) -> RunReport:
    """Arithmetic mean of every counter over runs that differ only in seed."""
    reports = list(reports)
    if not reports:
        raise ValueError("nothing to aggregate")
    first = reports[0]
    for r in reports[1:]:
        if (r.arch, r.strategy, r.pf) != (first.arch, first.strategy, first.pf):
            raise ConfigMismatch(f"cannot average {r.label} pf={r.pf} with {first.label} pf={first.pf}")
        if r.config_id and first.config_id and r.config_id != first.config_id:
            raise ConfigMismatch("reports come from different configurations")
    if len(reports) == 1:
        return first
    out = RunReport(first.arch, first.strategy, first.pf, ";".join(r.seed for r in reports))
    out.config_id = first.config_id
    n = len(reports)
    for f in fields(RunReport):
        if f.name in ("arch", "strategy", "pf", "seed", "config_id"):
            continue
        total = sum(getattr(r, f.name) for r in reports)
        mean = total / n
        setattr(out, f.name, int(mean) if float(mean).is_integer() else mean)
    return out


# -- emission --------------------------------------------------------------------

def fmt_num(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        if v.is_integer():
            return str(int(v))
        return f"{v:.4f}".rstrip("0").rstrip(".")
    return str(v)


def pct(part, whole):
    return 0.0 if whole == 0 else 100.0 * part / whole


def _row(r: RunReport):
    row = {}
    for k in CSV_COLUMNS:
        v = getattr(r, k)
        row[k] = f"{v:g}" if k == "pf" else fmt_num(v)
    return row


def emit_report(r, fmt="csv") -> bytes:
    return emit_reports([r] if isinstance(r, RunReport) else r, fmt)


def emit_reports(reports, fmt="csv") -> bytes:
    reports = list(reports)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in reports:
            w.writerow(_row(r))
        return buf.getvalue().encode()
    if fmt == "json":
        docs = []
        for r in reports:
            doc = {k: getattr(r, k) for k in CSV_COLUMNS}
            doc["seed"] = r.seed
            docs.append(doc)
        return (json.dumps(docs, sort_keys=True, indent=2) + "\n").encode()
    if fmt == "table":
        return render_table(reports).encode()
    raise ValueError(f"unknown report format {fmt!r}")


def _table(title, header, rows):
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
    lines = [title]
    sep = "  ".join("-" * w for w in widths)
    lines.append(sep)
    lines.append("  ".join(str(h).ljust(w) if i == 0 else str(h).rjust(w) for i, (h, w) in enumerate(zip(header, widths))))
    lines.append(sep)
    for row in rows:
        lines.append("  ".join(str(c).ljust(w) if i == 0 else str(c).rjust(w) for i, (c, w) in enumerate(zip(row, widths))))
    lines.append(sep)
    return "\n".join(lines)


def render_table(reports) -> str:
    """Plain-text layout of the flow, true-claim, false-claim and mutation tables."""
    f = fmt_num
    p = lambda a, b: f"{pct(a, b):.2f}"  # noqa: E731
    names = [f"{r.label} pf={r.pf:g} " + (f"mean({r.seed})" if ";" in r.seed else f"seed={r.seed}") for r in reports]
    out = []
    out.append(_table(
        "(a) Producer and network flow",
        ["", "Published", "True loc", "False loc", "Sent true", "Sent false", "Queued", "Lost", "Delivered"],
        [[n, f(r.published), f(r.published_true), f(r.published_false), f(r.sent_true), f(r.sent_false),
          f(r.queued), f(r.lost), f(r.delivered)] for n, r in zip(names, reports)],
    ))
    for title, cert, uncert in (
        ("(b) Delivered notifications with a true location claim", "dt_cert", "dt_uncert"),
        ("(c) Delivered notifications with a false location claim", "df_cert", "df_uncert"),
    ):
        rows = []
        for n, r in zip(names, reports):
            c, u = getattr(r, cert), getattr(r, uncert)
            rows.append([n, f(c + u), f(c), p(c, c + u), f(u), p(u, c + u)])
        out.append(_table(title, ["", "Total", "Cert", "%", "Uncert", "%"], rows))
    collab = [(n, r) for n, r in zip(names, reports) if r.arch == "collaborative"]
    if collab:
        rows = []
        for n, r in collab:
            tot = r.dt_cert + r.df_cert
            rows.append([n, f(tot)] + [x for k in ("remain_true", "false_to_true", "remain_false", "true_to_false")
                                       for x in (f(getattr(r, k)), p(getattr(r, k), tot))])
        out.append(_table(
            "(d) Certified notifications by claim mutation",
            ["", "Total", "Remain true", "%", "False to true", "%", "Remain false", "%", "True to false", "%"],
            rows,
        ))
        rows = []
        for n, r in collab:
            tot = r.dt_uncert + r.df_uncert
            rows.append([n, f(tot), f(r.uncert_remain_true), p(r.uncert_remain_true, tot),
                         f(r.uncert_remain_false), p(r.uncert_remain_false, tot)])
        out.append(_table("(e) Uncertified notifications", ["", "Total", "Remain true", "%", "Remain false", "%"], rows))
    return "\n\n".join(out) + "\n"


def emit_audit(rows) -> bytes:
    rows = list(rows)
    buf = io.StringIO()
    cols = list(NotificationAudit.__dataclass_fields__)
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for a in rows:
        w.writerow(a if isinstance(a, dict) else a.as_row())
    return buf.getvalue().encode()

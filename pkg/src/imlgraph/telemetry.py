"""Session telemetry in the study-data CSV schema."""

from __future__ import annotations

import io
import csv
import time
from dataclasses import dataclass, field

CSV_COLUMNS = [
    "condition",
    "graphID",
    "taskID",
    "startTime",
    "endTime",
    "duration",
    "correctAnswerProvided",
    "numberOfInteractions",
    "numberOfExpansions",
    "numberOfProjections",
    "numberOfOverviews",
    "numberOfSphericalViews",
    "accuracy",
]

CSV_HEADER = ",".join(CSV_COLUMNS)


@dataclass
class SessionLog:
    """Counters for one session, flushable as a single CSV row.

    Each accepted command is counted once. Overview visits are keyed to
    graph loads (a session re-enters the overview by reloading), spherical
    views to network expansion.
    """

    condition: str = "MULTI"
    graph_id: str = ""
    task_id: str = ""
    start_time: float = field(default_factory=time.time)
    end_time: float | None = None
    correct_answer_provided: bool = False
    accuracy: float = 0.0
    interactions: int = 0
    expansions: int = 0
    projections: int = 0
    overviews: int = 0
    spherical_views: int = 0

    def counters(self) -> dict[str, int]:
        return {
            "numberOfInteractions": self.interactions,
            "numberOfExpansions": self.expansions,
            "numberOfProjections": self.projections,
            "numberOfOverviews": self.overviews,
            "numberOfSphericalViews": self.spherical_views,
        }

    def row(self, now: float | None = None) -> list:
        end = self.end_time if self.end_time is not None else (now or time.time())
        return [
            self.condition,
            self.graph_id,
            self.task_id,
            f"{self.start_time:.3f}",
            f"{end:.3f}",
            f"{end - self.start_time:.3f}",
            str(self.correct_answer_provided).lower(),
            self.interactions,
            self.expansions,
            self.projections,
            self.overviews,
            self.spherical_views,
            f"{self.accuracy:.4f}",
        ]

    def to_csv(self, now: float | None = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerow(self.row(now))
        return buf.getvalue()


def log_interaction(log: SessionLog, event_type: str) -> SessionLog:
    """Record one accepted command. Unknown types still count as an
    interaction, so the total always covers every accepted command."""
    log.interactions += 1
    if event_type == "expandCommunity":
        log.expansions += 1
    elif event_type == "projectCommunity":
        log.projections += 1
    elif event_type == "loadGraph":
        log.overviews += 1
    elif event_type == "expandNetwork":
        log.spherical_views += 1
    return log

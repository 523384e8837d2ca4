"""Batch classification with an optional process pool."""

from collections.abc import Iterable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from time import perf_counter

from tvgroups.core.logging import get_logger
from tvgroups.models.classification import ClassificationRow, GroupKind
from tvgroups.services.automaton import Automaton
from tvgroups.services.classify import classification_row, classify_mealy
from tvgroups.services.group_engine import DEFAULT_MAX_CLOSURE

logger = get_logger(__name__)


@dataclass(frozen=True)
class ClassificationJob:
    """One automaton to classify, with the bounds it is classified under."""

    index: int
    automaton: Automaton
    max_exp: int
    bound: int
    max_closure: int


def classify_job(job: ClassificationJob) -> ClassificationRow:
    """Module-level so worker processes can unpickle it."""
    abelian, verdict = classify_mealy(
        job.automaton, job.max_exp, job.bound, max_closure=job.max_closure
    )
    return classification_row(job.index, job.automaton, abelian, verdict)


class BatchClassifier:
    """Classifies a stream of automata, serially or across worker processes."""

    def __init__(
        self,
        *,
        max_exp: int,
        bound: int,
        workers: int = 1,
        max_closure: int = DEFAULT_MAX_CLOSURE,
        chunksize: int = 4,
    ) -> None:
        self._max_exp = max_exp
        self._bound = bound
        self._workers = max(1, workers)
        self._max_closure = max_closure
        self._chunksize = chunksize

    def _jobs(self, automata: Iterable[Automaton]) -> list[ClassificationJob]:
        return [
            ClassificationJob(
                index=index,
                automaton=aut,
                max_exp=self._max_exp,
                bound=self._bound,
                max_closure=self._max_closure,
            )
            for index, aut in enumerate(automata)
        ]

    def run(self, automata: Iterable[Automaton]) -> list[ClassificationRow]:
        """
        Classify every automaton; rows are sorted by enumeration index.

        Args:
            automata: Automata in enumeration order

        Returns:
            One row per automaton, independent of worker scheduling
        """
        jobs = self._jobs(automata)
        started = perf_counter()
        logger.info("Batch started", extra={"automata": len(jobs), "workers": self._workers})

        if self._workers == 1 or len(jobs) < 2:
            rows = [classify_job(job) for job in jobs]
        else:
            with ProcessPoolExecutor(max_workers=self._workers) as pool:
                rows = list(pool.map(classify_job, jobs, chunksize=self._chunksize))

        rows.sort(key=lambda row: row.index)
        logger.info(
            "Batch completed",
            extra={
                "automata": len(rows),
                "abelian": sum(1 for row in rows if row.abelian),
                "unknown": sum(1 for row in rows if row.verdict == GroupKind.UNKNOWN),
                "elapsed_seconds": round(perf_counter() - started, 3),
            },
        )
        return rows

"""
Ensemble Runner
===============
Runs one task per ensemble member on a thread pool and collects the
results in member order.

Member m always uses the noise path keyed by (seed, m), so the collected
results do not depend on the schedule or the thread count. Members whose
solve blows up are excluded and reported, not silently dropped.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Generic, List, Optional, TypeVar

from spde_engine.data.noise import NoisePath, sample_path
from spde_engine.models.regularization import RegularizationParams
from spde_engine.utils.exceptions import BlowUpError
from spde_engine.utils.logger import ProgressLogger, get_logger

logger = get_logger(__name__)

T = TypeVar("T")


@dataclass
class EnsembleRun(Generic[T]):
    """Per-member results (None for excluded members) and the exclusions."""
    results: List[Optional[T]]
    excluded: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def completed(self) -> List[T]:
        return [r for r in self.results if r is not None]

    @property
    def members(self) -> int:
        return len(self.results)


def member_path(seed: int, member: int, params: RegularizationParams, modes: int) -> NoisePath:
    """Noise path of one member, long enough for params.T."""
    return sample_path(seed, params.steps, params.dt, modes, member=member)


def run_ensemble(
    task: Callable[[int], T],
    members: int,
    threads: int = 1,
    operation: str = "ensemble",
) -> EnsembleRun[T]:
    """
    Evaluate task(member) for member = 0 .. members-1.

    BlowUpError excludes the member; any other exception propagates.
    """
    results: List[Optional[T]] = [None] * members
    excluded: List[Dict[str, Any]] = []
    progress = ProgressLogger(logger, members, operation)

    def _record(member: int, outcome: Any) -> None:
        if isinstance(outcome, BlowUpError):
            logger.warning(f"{operation}: member {member} blew up at step {outcome.step_index}, excluded")
            excluded.append({"member": member, "step_index": outcome.step_index})
        else:
            results[member] = outcome
        progress.step(f"member {member}")

    def _guarded(member: int) -> Any:
        try:
            return task(member)
        except BlowUpError as exc:
            return exc

    if threads <= 1 or members <= 1:
        for member in range(members):
            _record(member, _guarded(member))
    else:
        with ThreadPoolExecutor(max_workers=min(threads, members)) as ex:
            futures = {ex.submit(_guarded, member): member for member in range(members)}
            for fut in as_completed(futures):
                _record(futures[fut], fut.result())

    progress.complete()
    excluded.sort(key=lambda item: item["member"])
    return EnsembleRun(results=results, excluded=excluded)

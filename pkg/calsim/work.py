import time
import typing as t


class AbstractProgressTracker:
    """
    Keeps track of completed units of work, in the case of a simulation run the judgments, and
    estimates the remaining time from it.
    """
    def __init__(self, total_work: int):
        self.total_work = total_work
        self.completed_work = 0
        self.history: t.List[t.Tuple[float, int]] = []
        self.remaining_time = 0.0
        self.eta = 0.0

        self.start_time: t.Optional[float] = None

    @property
    def remaining_work(self) -> int:
        return max(self.total_work - self.completed_work, 0)

    @property
    def fraction(self) -> float:
        return self.completed_work / self.total_work if self.total_work else 1.0

    def start(self) -> None:
        self.start_time = time.time()

    def update(self, n: int = 1) -> None:
        current_time = time.time()
        self.history.append((current_time, n))
        self.completed_work += n

        self.remaining_time = self.estimate()
        self.eta = current_time + self.remaining_time

    def estimate(self) -> float:
        raise NotImplementedError


class NaiveProgressTracker(AbstractProgressTracker):
    """
    Extrapolates the average time per unit of work so far linearly onto the remaining work. The
    batches of a run grow, so this overestimates early on and becomes accurate towards the end.
    """
    def estimate(self) -> float:
        if not self.completed_work or self.start_time is None:
            return 0.0

        elapsed = self.history[-1][0] - self.start_time
        return elapsed / self.completed_work * self.remaining_work

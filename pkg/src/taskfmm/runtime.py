"""Dependency-aware task execution engine.

Shared data is represented by handles. A task registers an access mode
(read, add or write) for each handle it touches at submission time; the
engine derives all ordering from these accesses:

  * read  / read : concurrent, any order
  * add   / add  : any order, but mutually exclusive execution per handle
  * anything else: ordered by submission sequence

Internally each handle keeps a queue of generations: consecutive
same-mode read or add accesses share a generation, writes are singleton
generations. Only the front generation is enabled; a task becomes ready
when all of its accesses are enabled. Add exclusivity is enforced with a
per-handle mutex claimed in handle-id order.

Workers own one FIFO deque each and steal from the back of other deques;
the single submitter distributes ready tasks round-robin.
"""

from __future__ import annotations

import enum
import itertools
import random
import threading
import time
from collections import deque
from dataclasses import dataclass, field


class AccessMode(enum.Enum):
    READ = "read"
    ADD = "add"
    WRITE = "write"


@dataclass
class _Generation:
    mode: AccessMode
    accesses: list["Task"] = field(default_factory=list)
    completed: int = 0


class Handle:
    """Proxy for one piece of shared data."""

    __slots__ = ("id", "generations", "front", "add_lock", "running")

    def __init__(self, hid: int):
        self.id = hid
        self.generations: deque[_Generation] = deque()
        self.front = 0  # completed generations are popped; front is index 0
        self.add_lock = threading.Lock()
        # mode -> number of currently executing accesses (instrumentation)
        self.running = {AccessMode.READ: 0, AccessMode.ADD: 0,
                        AccessMode.WRITE: 0}


@dataclass
class TraceEvent:
    worker: int
    kind: str
    seq: int
    start_ns: int
    end_ns: int

    @property
    def duration_ns(self) -> int:
        return self.end_ns - self.start_ns


class Task:
    """One unit of work, typically a single small matrix-vector product."""

    __slots__ = ("kind", "accesses", "body", "seq", "_pending")

    def __init__(self, kind: str, accesses, body):
        handles = [h for h, _ in accesses]
        if len({h.id for h in handles}) != len(handles):
            raise ValueError("a handle may appear at most once per task")
        self.kind = kind
        self.accesses = list(accesses)
        self.body = body
        self.seq = -1
        self._pending = 0


@dataclass(frozen=True)
class RuntimeConfig:
    workers: int = 1
    trace: bool = True
    # Randomize ready-task selection (dependency stress testing).
    stress_seed: int | None = None

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("need at least one worker")


class ConflictError(RuntimeError):
    """Two incompatible accesses were observed executing concurrently."""


class Runtime:
    def __init__(self, config: RuntimeConfig):
        self.config = config
        self._t0 = time.monotonic_ns()
        self._lock = threading.Lock()
        self._work_cv = threading.Condition(self._lock)
        self._done_cv = threading.Condition(self._lock)
        self._queues = [deque() for _ in range(config.workers)]
        self._handle_ids = itertools.count()
        self._seq = itertools.count()
        self._submitted = 0
        self._completed = 0
        self._shutdown = False
        self._rr = 0
        self._rngs = [random.Random(config.stress_seed * 1000003 + w)
                      if config.stress_seed is not None else None
                      for w in range(config.workers)]
        self._events: list[list[TraceEvent]] = [[] for _ in range(config.workers)]
        self._violations = 0
        self._errors: list[Exception] = []
        self._threads = [
            threading.Thread(target=self._worker, args=(w,), daemon=True)
            for w in range(config.workers)
        ]
        for t in self._threads:
            t.start()

    # -- submitter API ----------------------------------------------------

    def create_handle(self) -> Handle:
        return Handle(next(self._handle_ids))

    def submit(self, task: Task) -> None:
        with self._lock:
            if self._shutdown:
                raise RuntimeError("submit after shutdown")
            task.seq = next(self._seq)
            self._submitted += 1
            pending = 0
            for handle, mode in task.accesses:
                gens = handle.generations
                mergeable = (
                    gens
                    and gens[-1].mode == mode
                    and mode in (AccessMode.READ, AccessMode.ADD)
                )
                if mergeable:
                    gen = gens[-1]
                else:
                    gen = _Generation(mode)
                    gens.append(gen)
                gen.accesses.append(task)
                if gen is not gens[0]:
                    pending += 1
            task._pending = pending
            if pending == 0:
                self._push(task)

    def barrier(self) -> None:
        with self._lock:
            while self._completed < self._submitted:
                self._done_cv.wait()
            if self._errors:
                raise self._errors[0]

    def trace(self) -> list[TraceEvent]:
        with self._lock:
            if self._completed < self._submitted:
                raise RuntimeError("trace() is only valid after barrier()")
            events = [e for per_worker in self._events for e in per_worker]
        return sorted(events, key=lambda e: (e.start_ns, e.worker))

    def shutdown(self) -> None:
        with self._lock:
            self._shutdown = True
            self._work_cv.notify_all()
        for t in self._threads:
            t.join()
        if self._violations:
            raise ConflictError(f"{self._violations} concurrent-access conflicts")

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.shutdown()

    # -- internals --------------------------------------------------------

    def _push(self, task: Task) -> None:
        # Caller holds the lock. Round-robin keeps the submitter from
        # funnelling everything through one queue.
        self._queues[self._rr].append(task)
        self._rr = (self._rr + 1) % len(self._queues)
        self._work_cv.notify()

    def _take(self, wid: int) -> Task | None:
        own = self._queues[wid]
        rng = self._rngs[wid]
        if own:
            if rng is not None and len(own) > 1:
                k = rng.randrange(len(own))
                own.rotate(-k)
                task = own.popleft()
                own.rotate(k)
                return task
            return own.popleft()
        order = (rng.sample(range(len(self._queues)), len(self._queues))
                 if rng is not None else range(len(self._queues)))
        for victim in order:
            if victim != wid and self._queues[victim]:
                return self._queues[victim].pop()
        return None

    def _worker(self, wid: int) -> None:
        record = self.config.trace
        while True:
            with self._lock:
                task = self._take(wid)
                while task is None and not self._shutdown:
                    self._work_cv.wait()
                    task = self._take(wid)
                if task is None:
                    return
            try:
                self._run_task(wid, task, record)
            except Exception as exc:  # keep the worker alive
                with self._lock:
                    self._errors.append(exc)

    def _run_task(self, wid: int, task: Task, record: bool) -> None:
        add_handles = sorted(
            (h for h, m in task.accesses if m is AccessMode.ADD),
            key=lambda h: h.id,
        )
        for h in add_handles:  # id order: deadlock free
            h.add_lock.acquire()
        self._check_conflicts(task, entering=True)
        start = time.monotonic_ns() - self._t0
        try:
            task.body()
        finally:
            end = time.monotonic_ns() - self._t0
            self._check_conflicts(task, entering=False)
            for h in reversed(add_handles):
                h.add_lock.release()
            if record:
                self._events[wid].append(
                    TraceEvent(wid, task.kind, task.seq, start, end))
            self._complete(task)

    def _check_conflicts(self, task: Task, entering: bool) -> None:
        delta = 1 if entering else -1
        with self._lock:
            for h, m in task.accesses:
                if entering:
                    r = h.running
                    conflict = (
                        (m is AccessMode.WRITE and any(r.values()))
                        or (m is AccessMode.ADD
                            and (r[AccessMode.ADD] or r[AccessMode.WRITE]))
                        or (m is AccessMode.READ and r[AccessMode.WRITE])
                    )
                    if conflict:
                        self._violations += 1
                h.running[m] += delta

    def _complete(self, task: Task) -> None:
        with self._lock:
            for handle, mode in task.accesses:
                gen = handle.generations[0]
                gen.completed += 1
                if gen.completed == len(gen.accesses):
                    handle.generations.popleft()
                    if handle.generations:
                        for succ in handle.generations[0].accesses:
                            succ._pending -= 1
                            if succ._pending == 0:
                                self._push(succ)
            self._completed += 1
            if self._completed == self._submitted:
                self._done_cv.notify_all()


def create_runtime(config: RuntimeConfig) -> Runtime:
    return Runtime(config)

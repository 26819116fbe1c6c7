"""Circular multi-queue: the streaming buffer behind deep temporal blocking.

One queue per fused time step, all laid out in a single backing buffer.
Each queue exposes a window of 2*rad+1 consecutive slots (modulo the buffer
range for the circular variants); enqueue writes the newest slot of a
window, and the queues are spaced so that enqueueing into step s+1
overwrites exactly the slot that just expired from step s's window.

Three address-management variants with identical observable behavior:

- ``shifting-data``: heads are fixed; a shuffle moves every element one
  slot toward the front.
- ``shifting-address``: elements stay put; a shuffle advances every head
  by one modulo the range.
- ``computing-address``: like shifting-address, but the range is padded to
  a power of two so the modulo reduces to a bit mask.

Lazy mode widens the spacing between queues so a whole enqueue/compute
sweep needs no intermediate synchronization (one sync per tile advance);
it requires a larger backing buffer.

Slots hold arbitrary elements: scalars for 1D streams, row or plane
handles when the engines stream 2D/3D grids.

Spacing caveat: the default spacing rad+1 packs the buffer tightest and
matches the published radius-1 layout, where each enqueue into step s+1
lands exactly on the slot expiring from step s's window.  That identity
only holds because rad+1 == 2*rad at radius 1; at radius >= 2 an in-place
pipeline must space queues by at least 2*rad or the enqueue clobbers a
slot still inside the shallower window.  The pipeline drivers pass the
safe spacing explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

VARIANTS = ("shifting-data", "shifting-address", "computing-address")


class QueueError(ValueError):
    pass


def next_pow2(n: int) -> int:
    p = 1
    while p < n:
        p <<= 1
    return p


def masked_mod(a: int, range_: int) -> int:
    """a mod range; uses the AND mask when range is a power of two."""
    if range_ < 1:
        raise ValueError("range must be >= 1")
    if range_ & (range_ - 1) == 0:
        return a & (range_ - 1)
    return a % range_


def naive_range(depth: int, rad: int, queue_spacing: int | None = None) -> int:
    """Backing-buffer length for the shifting variants."""
    q_r = queue_spacing if queue_spacing is not None else rad + 1
    return q_r * depth + rad


def circular_range(
    depth: int,
    rad: int,
    variant: str = "shifting-data",
    lazy: bool = False,
    lazy_capacity: int | None = None,
    queue_spacing: int | None = None,
) -> int:
    """Buffer length for a given configuration, without building the queue."""
    if variant not in VARIANTS:
        raise QueueError(f"unknown variant {variant!r}")
    if lazy:
        q_r = queue_spacing if queue_spacing is not None else rad + 2
        need = naive_range(depth, rad, q_r)
        if lazy_capacity is None or lazy_capacity < need:
            raise QueueError(
                f"lazy capacity {lazy_capacity} below required range {need}"
            )
        if variant == "computing-address":
            return next_pow2(lazy_capacity)
        return lazy_capacity
    need = naive_range(depth, rad, queue_spacing)
    if variant == "computing-address":
        return next_pow2(need)
    return need


@dataclass
class StreamQueue:
    """View of one time step's queue inside the shared buffer."""

    head: int
    tail: int
    window: int


class CircularMultiQueue:
    def __init__(
        self,
        depth: int,
        rad: int,
        variant: str = "shifting-data",
        lazy: bool = False,
        lazy_capacity: int | None = None,
        queue_spacing: int | None = None,
    ):
        if depth < 1 or rad < 1:
            raise QueueError("depth and rad must be >= 1")
        if variant not in VARIANTS:
            raise QueueError(f"unknown variant {variant!r}")
        if queue_spacing is not None and queue_spacing < rad + 1:
            raise QueueError("queue spacing must be >= rad + 1")
        self.depth = depth
        self.rad = rad
        self.variant = variant
        self.lazy = lazy
        if queue_spacing is None:
            queue_spacing = rad + 2 if lazy else rad + 1
        self.queue_spacing = queue_spacing
        self.range = circular_range(
            depth, rad, variant, lazy, lazy_capacity, queue_spacing
        )
        self.window = 2 * rad + 1
        # Deepest queue at the front of the buffer, step 0 nearest the end.
        self.heads = [self.queue_spacing * (depth - 1 - s) for s in range(depth)]
        self.backing: list = [None] * self.range
        self.fill = [0] * depth
        self._stale = [False] * depth  # shuffle since last enqueue
        self.shuffles = 0

    # -- addressing ----------------------------------------------------

    def _slot(self, level: int, i: int) -> int:
        if self.variant == "shifting-data":
            return self.heads[level] + i
        return masked_mod(self.heads[level] + i, self.range)

    def queue(self, level: int) -> StreamQueue:
        self._check_level(level)
        return StreamQueue(
            head=self._slot(level, 0),
            tail=self._slot(level, self.window - 1),
            window=self.window,
        )

    def _check_level(self, level: int):
        if not 0 <= level < self.depth:
            raise QueueError(
                f"queue level {level} out of range [0, {self.depth})"
            )

    # -- operations ----------------------------------------------------

    def enqueue(self, level: int, value):
        """Write the newest window slot of the given step's queue."""
        self._check_level(level)
        self.backing[self._slot(level, self.window - 1)] = value
        if self.fill[level] < self.window:
            self.fill[level] += 1
        self._stale[level] = False

    def ready(self, level: int) -> bool:
        """True when the window is populated and fresh since the last shuffle."""
        self._check_level(level)
        return self.fill[level] >= self.window and not self._stale[level]

    def window_values(self, level: int) -> list:
        """Window contents, oldest first; requires a populated window."""
        self._check_level(level)
        if not self.ready(level):
            raise QueueError(
                f"queue {level} window under-filled "
                f"({self.fill[level]}/{self.window}, stale={self._stale[level]})"
            )
        return [self.backing[self._slot(level, i)] for i in range(self.window)]

    def compute(self, level: int, coefficients) -> float:
        """Weighted sum over the window (the 1D stencil update)."""
        values = self.window_values(level)
        if len(coefficients) != self.window:
            raise QueueError(
                f"expected {self.window} coefficients, got {len(coefficients)}"
            )
        acc = coefficients[0] * values[0]
        for c, v in zip(coefficients[1:], values[1:]):
            acc = acc + c * v
        return acc

    def shuffle(self):
        """Advance every queue one slot, per the variant's mechanism."""
        if self.variant == "shifting-data":
            for i in range(self.range - 1):
                self.backing[i] = self.backing[i + 1]
        else:
            for s in range(self.depth):
                self.heads[s] = masked_mod(self.heads[s] + 1, self.range)
        self.shuffles += 1
        for s in range(self.depth):
            self._stale[s] = True

    def dump_state(self) -> str:
        """One debug line per shuffle, consumed by the trace validator."""
        heads = ",".join(str(h) for h in self.heads)
        fill = ",".join(str(f) for f in self.fill)
        return f"shuffle={self.shuffles} heads=[{heads}] fill=[{fill}] range={self.range}"


def pipeline_spacing(rad: int, lazy: bool) -> int:
    """Expiry-safe queue spacing for in-place pipelines (see module note);
    equals the published constants 2 and 3 at radius 1."""
    return 2 * rad + 1 if lazy else 2 * rad


@dataclass
class StreamResult:
    """Output of a pipeline drive: values plus their first cell index."""

    outputs: list
    first_index: int
    syncs: int
    shuffles: int
    debug: list[str]


def stream_pipeline(
    inputs,
    depth: int,
    rad: int,
    coefficients,
    variant: str = "shifting-data",
    lazy: bool = False,
    lazy_capacity: int | None = None,
    collect_debug: bool = False,
) -> StreamResult:
    """Drive a depth-step pipeline over a 1D input stream.

    Emits the temporally blocked outputs for every cell whose full
    dependency cone lies inside the streamed region (cells t*rad from
    either end are not emitted).  Synchronization counting: one sync per
    queue level per streamed cell without lazy buffering, one per cell
    with it.
    """
    spacing = pipeline_spacing(rad, lazy)
    if lazy and lazy_capacity is None:
        lazy_capacity = naive_range(depth, rad, spacing)
    mq = CircularMultiQueue(
        depth, rad, variant, lazy=lazy, lazy_capacity=lazy_capacity,
        queue_spacing=spacing,
    )
    window = 2 * rad + 1
    outputs: list = []
    syncs = 0
    debug: list[str] = []
    for value in inputs:
        mq.enqueue(0, value)
        for s in range(depth):
            if mq.fill[s] < window:
                break
            result = mq.compute(s, coefficients)
            if s + 1 < depth:
                mq.enqueue(s + 1, result)
            else:
                outputs.append(result)
        syncs += 1 if lazy else depth
        mq.shuffle()
        if collect_debug:
            debug.append(mq.dump_state())
    return StreamResult(
        outputs=outputs,
        first_index=depth * rad,
        syncs=syncs,
        shuffles=mq.shuffles,
        debug=debug,
    )

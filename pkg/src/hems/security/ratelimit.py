"""Request admission control: rolling per-client minute window plus global day cap."""

from __future__ import annotations

import threading
from collections import defaultdict, deque

SECONDS_PER_MINUTE = 60.0
SECONDS_PER_DAY = 86400.0


class RateLimiter:
    """Admits at most per_minute requests per client per rolling 60 s and
    per_day requests globally per UTC day.

    Timestamps are epoch seconds. Check-and-increment is atomic, so two
    concurrent callers can never both take the last slot.
    """

    def __init__(self, per_minute: int = 20, per_day: int = 200):
        self.per_minute = per_minute
        self.per_day = per_day
        self._minute_windows: dict[str, deque[float]] = defaultdict(deque)
        self._day_counts: dict[int, int] = defaultdict(int)
        self._lock = threading.Lock()

    def try_acquire(self, client_id: str, now: float) -> bool:
        """Admit the request and consume a slot, or refuse without consuming."""
        day = int(now // SECONDS_PER_DAY)
        with self._lock:
            window = self._minute_windows[client_id]
            cutoff = now - SECONDS_PER_MINUTE
            while window and window[0] <= cutoff:
                window.popleft()
            if len(window) >= self.per_minute:
                return False
            if self._day_counts[day] >= self.per_day:
                return False
            window.append(now)
            self._day_counts[day] += 1
            return True

    def minute_count(self, client_id: str, now: float) -> int:
        with self._lock:
            cutoff = now - SECONDS_PER_MINUTE
            return sum(1 for t in self._minute_windows[client_id] if t > cutoff)

    def day_count(self, now: float) -> int:
        with self._lock:
            return self._day_counts[int(now // SECONDS_PER_DAY)]

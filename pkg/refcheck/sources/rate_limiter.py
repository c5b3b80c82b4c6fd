import time
import logging
import threading

logger = logging.getLogger(__name__)


class RateLimiter:
    """
    Per-source request spacing. Each source keeps its own clock, so
    waiting on CrossRef never delays OpenAlex. A limiter built with an
    interval of 0 (or disabled) hands out permits immediately.
    """

    def __init__(self, interval_ms: int = 800, enabled: bool = True,
                 clock=time.monotonic, sleep=time.sleep):
        self.interval = max(interval_ms, 0) / 1000.0
        self.enabled = enabled and self.interval > 0
        self.clock = clock
        self.sleep = sleep
        self._last_request = {}
        self._locks = {}
        self._guard = threading.Lock()

    def _lock_for(self, source):
        with self._guard:
            return self._locks.setdefault(source, threading.Lock())

    def acquire(self, source):
        """
        Block until a request to source may start

        Parameters
        ----------
        source : SourceId
            source about to be queried.

        Returns
        -------
        float
            clock reading at which the permit was granted.

        """
        if not self.enabled:
            return self.clock()

        with self._lock_for(source):
            last = self._last_request.get(source)
            now = self.clock()
            if last is not None and now - last < self.interval:
                delay = self.interval - (now - last)
                logger.debug(f"Waiting {delay:.3f}s before querying {source.value}")
                self.sleep(delay)
                now = self.clock()
            self._last_request[source] = now
            return now

    __call__ = acquire

"""Fine-tune job queue: one worker thread, FIFO, so at most one job mutates
the model registry at a time."""

import queue
import threading
import traceback
from dataclasses import dataclass, field


@dataclass
class Job:
    job_id: str
    run: callable
    status: str = "queued"  # queued | running | completed | failed
    result: dict | None = None
    error: str | None = None


@dataclass
class JobQueue:
    jobs: dict[str, Job] = field(default_factory=dict)
    _queue: queue.Queue = field(default_factory=queue.Queue)
    _lock: threading.Lock = field(default_factory=threading.Lock)
    _counter: int = 0
    _worker: threading.Thread | None = None

    def _ensure_worker(self):
        if self._worker is None or not self._worker.is_alive():
            self._worker = threading.Thread(target=self._loop, daemon=True)
            self._worker.start()

    def _loop(self):
        while True:
            job = self._queue.get()
            with self._lock:
                job.status = "running"
            try:
                result = job.run()
                with self._lock:
                    job.result = result
                    job.status = "completed"
            except Exception:
                with self._lock:
                    job.error = traceback.format_exc(limit=3)
                    job.status = "failed"
            finally:
                self._queue.task_done()

    def submit(self, run) -> str:
        with self._lock:
            self._counter += 1
            job_id = f"job-{self._counter:06d}"
            job = Job(job_id=job_id, run=run)
            self.jobs[job_id] = job
        self._queue.put(job)
        self._ensure_worker()
        return job_id

    def get(self, job_id: str) -> Job | None:
        with self._lock:
            return self.jobs.get(job_id)

    def wait_all(self, timeout: float = 60.0):
        self._queue.join()

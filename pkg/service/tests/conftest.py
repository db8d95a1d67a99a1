import pytest
from fastapi.testclient import TestClient

from embed_service import create_app


@pytest.fixture()
def client():
    app = create_app(seed=0, max_batch=8)
    with TestClient(app) as c:
        yield c


def wait_for_job(client, job_id, tries=200):
    import time

    for _ in range(tries):
        body = client.get(f"/jobs/{job_id}").json()
        if body["status"] in ("completed", "failed"):
            return body
        time.sleep(0.05)
    raise TimeoutError(f"job {job_id} did not finish")

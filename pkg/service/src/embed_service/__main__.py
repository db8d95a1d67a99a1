"""Run the service: python -m embed_service

Env vars: EMBED_SERVICE_HOST (default 127.0.0.1), EMBED_SERVICE_PORT (8901),
EMBED_SERVICE_MAX_BATCH (256), EMBED_SERVICE_SEED (0),
EMBED_SERVICE_MODEL_PATH (optional local transformer checkpoint).
"""

import os

import uvicorn

from .app import create_app


def main():
    app = create_app(seed=int(os.environ.get("EMBED_SERVICE_SEED", "0")))
    uvicorn.run(
        app,
        host=os.environ.get("EMBED_SERVICE_HOST", "127.0.0.1"),
        port=int(os.environ.get("EMBED_SERVICE_PORT", "8901")),
        log_level="warning",
    )


if __name__ == "__main__":
    main()

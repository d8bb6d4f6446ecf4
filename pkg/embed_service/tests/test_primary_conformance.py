"""Run the engine's remote-provider conformance suite against this service.

The suite in ../tests/test_remote_provider.py normally runs against an
in-process mock; pointing FUSENET_EMBED_URL at the live service must
make it pass unchanged.
"""

import os
import subprocess
import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent.parent
PRIMARY_SUITE = REPO_ROOT / "tests" / "test_remote_provider.py"


def test_primary_remote_suite_passes_against_live_service(live_service):
    live_service.wait_ready()
    env = dict(os.environ, FUSENET_EMBED_URL=live_service.url)
    result = subprocess.run(
        [sys.executable, "-m", "pytest", str(PRIMARY_SUITE), "-q"],
        cwd=REPO_ROOT,
        env=env,
        capture_output=True,
        text=True,
        timeout=600,
    )
    assert result.returncode == 0, result.stdout + result.stderr
    assert "passed" in result.stdout

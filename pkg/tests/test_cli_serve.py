"""End-to-end checks of the installed entry points as subprocesses."""

import json
import signal
import subprocess
import sys
import time

import pytest
import requests


def test_console_script_validate():
    proc = subprocess.run(
        [sys.executable, "-m", "btkit", "validate", "blood_draw"],
        capture_output=True, text=True, timeout=60,
    )
    assert proc.returncode == 0
    assert "ok" in proc.stdout


def test_serve_reports_closed_sessions_on_shutdown():
    proc = subprocess.Popen(
        [sys.executable, "-m", "btkit", "serve", "airway", "--port", "0"],
        stdout=subprocess.PIPE, stderr=subprocess.STDOUT, text=True,
    )
    try:
        line = proc.stdout.readline()
        assert "serving 'airway'" in line
        base = line.split("on ")[1].split(",")[0].strip()

        created = requests.post(f"{base}/sessions", json={}).json()
        assert created["prompt"]["leaf"] == "spo2_above_93"

        proc.send_signal(signal.SIGTERM)
        out, _ = proc.communicate(timeout=10)
        assert "1 in-flight session(s) closed" in out
        assert proc.returncode == 0
    finally:
        if proc.poll() is None:
            proc.kill()


def test_run_budget_exhaustion_reports_distinct_outcome(tmp_path):
    # the monitor keeps sampling and nothing ever secures the airway
    script = tmp_path / "s.json"
    script.write_text(json.dumps({"outcomes": {
        "spo2_above_93": ["success"] * 3,
        "laryngoscopy": ["running", "running", "running"],
    }}))
    proc = subprocess.run(
        [sys.executable, "-m", "btkit", "run", "airway", str(script), "--max-ticks", "3"],
        capture_output=True, text=True, timeout=60,
    )
    assert proc.returncode == 0
    assert "outcome: budget_exhausted" in proc.stdout

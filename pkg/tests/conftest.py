import os

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# criterion number -> (passed, description, detail)
ACCEPTANCE: dict[int, tuple[bool, str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, desc, detail = ACCEPTANCE[k]
        line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {desc}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)

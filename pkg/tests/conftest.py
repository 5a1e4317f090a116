from hypothesis import HealthCheck, settings

# derandomized so every run of the suite sees the same examples
settings.register_profile(
    "repro", derandomize=True, deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repro")

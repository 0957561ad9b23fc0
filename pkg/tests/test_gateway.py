import json
import logging

import pytest

from emorl.errors import ConfigError, PermanentFailure, ReplayMiss, TransportFailure
from emorl.gateway import ChatRequest, EndpointProfile, Gateway, cache_key, load_profiles


def ok_body(text):
    return {"choices": [{"message": {"content": text}}]}


class FakeTransport:
    """Scriptable transport: pops the next (status, body) per call."""

    def __init__(self, script=None, text="hello"):
        self.script = list(script or [])
        self.text = text
        self.calls = 0
        self.last_headers = None
        self.last_payload = None

    def __call__(self, url, headers, payload, timeout):
        self.calls += 1
        self.last_headers = headers
        self.last_payload = payload
        if self.script:
            event = self.script.pop(0)
            if event == "conn":
                raise ConnectionError("synthetic network drop")
            status, body = event
            return status, body
        return 200, ok_body(self.text)


class FakeClock:
    def __init__(self):
        self.now = 0.0

    def __call__(self):
        return self.now

    def sleep(self, seconds):
        self.now += seconds


def profile(**kwargs):
    defaults = dict(
        name="sim", base_url="https://example.invalid/v1", model="judge-1",
        api_key_env="EMORL_TEST_KEY", retry_budget=3,
        rate_limit_per_sec=100.0, rate_burst=100,
    )
    defaults.update(kwargs)
    return EndpointProfile(**defaults)


def gateway(transport, mode="live", cache_dir=None, prof=None, clock=None, **kwargs):
    clock = clock or FakeClock()
    prof = prof or profile()
    return Gateway(
        {prof.name: prof}, mode=mode, cache_dir=cache_dir, transport=transport,
        clock=clock, sleeper=clock.sleep, getenv=lambda name: "sk-test-secret",
        **kwargs,
    )


def request(tag="t1", profile_name="sim"):
    return ChatRequest(
        profile=profile_name,
        messages=({"role": "user", "content": "hi"},),
        tag=tag,
    )


class TestComplete:
    def test_happy_path(self):
        transport = FakeTransport(text="world")
        assert gateway(transport).complete(request()) == "world"
        assert transport.calls == 1

    def test_two_transient_failures_then_success(self):
        transport = FakeTransport(script=[(500, {}), "conn", (200, ok_body("ok"))])
        assert gateway(transport).complete(request()) == "ok"
        assert transport.calls == 3

    def test_budget_exhausted_raises_transport_failure(self):
        transport = FakeTransport(script=[(500, {}), (503, {}), (429, {})])
        with pytest.raises(TransportFailure):
            gateway(transport).complete(request())
        assert transport.calls == 3

    def test_permanent_failure_no_retry(self):
        transport = FakeTransport(script=[(401, {})])
        with pytest.raises(PermanentFailure):
            gateway(transport).complete(request())
        assert transport.calls == 1

    def test_missing_credential_named_by_env_var(self):
        transport = FakeTransport()
        gw = Gateway({"sim": profile()}, transport=transport, getenv=lambda name: None)
        with pytest.raises(ConfigError, match="EMORL_TEST_KEY"):
            gw.complete(request())

    def test_unknown_profile(self):
        with pytest.raises(ConfigError, match="nope"):
            gateway(FakeTransport()).complete(request(profile_name="nope"))


class TestCacheModes:
    def test_record_then_replay_byte_identical_and_offline(self, tmp_path):
        transport = FakeTransport(text="recorded answer")
        gw = gateway(transport, mode="record", cache_dir=tmp_path)
        first = gw.complete(request())
        assert transport.calls == 1
        # replay with a transport that counts dials: must stay at zero
        counting = FakeTransport()
        replay_gw = gateway(counting, mode="replay", cache_dir=tmp_path)
        assert replay_gw.complete(request()) == first
        assert counting.calls == 0

    def test_record_mode_dedupes(self, tmp_path):
        transport = FakeTransport()
        gw = gateway(transport, mode="record", cache_dir=tmp_path)
        gw.complete(request())
        gw.complete(request())
        assert transport.calls == 1

    def test_replay_miss_is_explicit(self, tmp_path):
        counting = FakeTransport()
        gw = gateway(counting, mode="replay", cache_dir=tmp_path)
        with pytest.raises(ReplayMiss):
            gw.complete(request())
        assert counting.calls == 0

    def test_hand_edited_entry_detected(self, tmp_path, caplog):
        transport = FakeTransport(text="original")
        gw = gateway(transport, mode="record", cache_dir=tmp_path)
        gw.complete(request())
        entry_path = next(tmp_path.glob("*.json"))
        entry = json.loads(entry_path.read_text())
        entry["response"] = "tampered"
        entry_path.write_text(json.dumps(entry))
        replay_gw = gateway(FakeTransport(), mode="replay", cache_dir=tmp_path)
        with caplog.at_level(logging.WARNING):
            with pytest.raises(ReplayMiss):
                replay_gw.complete(request())
        assert "digest mismatch" in caplog.text

    def test_strict_cache_raises_on_corruption(self, tmp_path):
        transport = FakeTransport()
        gw = gateway(transport, mode="record", cache_dir=tmp_path)
        gw.complete(request())
        entry_path = next(tmp_path.glob("*.json"))
        entry_path.write_text("{broken json")
        strict_gw = gateway(FakeTransport(), mode="replay", cache_dir=tmp_path,
                            strict_cache=True)
        with pytest.raises(ConfigError):
            strict_gw.complete(request())

    def test_replay_requires_cache_dir(self):
        with pytest.raises(ConfigError):
            gateway(FakeTransport(), mode="replay")


class TestCacheKey:
    def test_identical_requests_collide(self):
        a = cache_key("p", "m", [{"role": "user", "content": "x"}], 0.0, "t")
        b = cache_key("p", "m", [{"role": "user", "content": "x"}], 0.0, "t")
        assert a == b

    def test_any_field_change_misses(self):
        base = ("p", "m", [{"role": "user", "content": "x"}], 0.0, "t")
        variants = [
            ("q", "m", [{"role": "user", "content": "x"}], 0.0, "t"),
            ("p", "m2", [{"role": "user", "content": "x"}], 0.0, "t"),
            ("p", "m", [{"role": "user", "content": "y"}], 0.0, "t"),
            ("p", "m", [{"role": "user", "content": "x"}], 1.0, "t"),
            ("p", "m", [{"role": "user", "content": "x"}], 0.0, "u"),
        ]
        for variant in variants:
            assert cache_key(*variant) != cache_key(*base)

    def test_two_profiles_same_messages_distinct_keys(self, tmp_path):
        clock = FakeClock()
        profiles = {"a": profile(name="a"), "b": profile(name="b")}
        transport = FakeTransport()
        gw = Gateway(profiles, mode="record", cache_dir=tmp_path, transport=transport,
                     clock=clock, sleeper=clock.sleep, getenv=lambda n: "k")
        gw.complete(request(profile_name="a"))
        gw.complete(request(profile_name="b"))
        assert len(list(tmp_path.glob("*.json"))) == 2


class TestRateLimit:
    def test_requests_within_ceiling_over_any_window(self):
        clock = FakeClock()
        prof = profile(rate_limit_per_sec=2.0, rate_burst=2, retry_budget=1)
        transport = FakeTransport()
        issue_times = []

        original = transport.__call__

        def timed(url, headers, payload, timeout):
            issue_times.append(clock.now)
            return original(url, headers, payload, timeout)

        gw = Gateway({"sim": prof}, transport=timed, clock=clock, sleeper=clock.sleep,
                     getenv=lambda n: "k")
        for i in range(10):
            gw.complete(request(tag=f"t{i}"))
        # token bucket with rate 2/s, burst 2: any 1s window holds <= 3 sends
        for t in issue_times:
            in_window = [u for u in issue_times if t <= u < t + 1.0]
            assert len(in_window) <= 3

    def test_burst_then_spacing(self):
        clock = FakeClock()
        prof = profile(rate_limit_per_sec=1.0, rate_burst=1, retry_budget=1)
        transport = FakeTransport()
        gw = Gateway({"sim": prof}, transport=transport, clock=clock,
                     sleeper=clock.sleep, getenv=lambda n: "k")
        gw.complete(request(tag="a"))
        t0 = clock.now
        gw.complete(request(tag="b"))
        assert clock.now - t0 >= 0.99


class TestSecretsHygiene:
    def test_key_not_in_cache_or_logs(self, tmp_path, caplog):
        transport = FakeTransport(script=[(500, {}), (200, ok_body("fine"))])
        gw = gateway(transport, mode="record", cache_dir=tmp_path)
        with caplog.at_level(logging.DEBUG):
            gw.complete(request())
        assert "sk-test-secret" not in caplog.text
        for entry in tmp_path.glob("*.json"):
            assert "sk-test-secret" not in entry.read_text()
        # the key does go to the transport header, and only there
        assert transport.last_headers["Authorization"] == "Bearer sk-test-secret"


class TestProfilesFile:
    def test_load_profiles(self, tmp_path):
        path = tmp_path / "profiles.yaml"
        path.write_text(
            "simulator:\n  base_url: https://api.example.invalid/v1\n"
            "  model: sim-model\n  api_key_env: MY_KEY\n  rate_limit_per_sec: 3\n"
            "judge:\n  base_url: https://api.example.invalid/v1\n  model: judge-model\n"
        )
        profiles = load_profiles(path)
        assert profiles["simulator"].model == "sim-model"
        assert profiles["simulator"].api_key_env == "MY_KEY"
        assert profiles["judge"].temperature == 0.0

    def test_unknown_field_named(self, tmp_path):
        path = tmp_path / "profiles.yaml"
        path.write_text("sim:\n  base_url: x\n  model: m\n  shoes: 9\n")
        with pytest.raises(ConfigError, match="sim"):
            load_profiles(path)

import math
import random
import statistics

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from navbeacon.vad import (
    AudioFrame,
    VadConfig,
    VadEventKind,
    VoiceActivityDetector,
    calibrate,
    calibrate_from_rms,
    frame_rms,
    frames_from_wav,
)

from conftest import make_wav


def const_frames(rms_values, frame_len=0.02, n_samples=8, t0=0.0):
    """One constant-amplitude frame per requested RMS value."""
    return [
        AudioFrame(np.full(n_samples, v), t=t0 + i * frame_len)
        for i, v in enumerate(rms_values)
    ]


def reference_events(rms_values, cfg: VadConfig):
    """Frame-by-frame simulation oracle, independent of the detector class."""
    events = []
    speaking = False
    loud_run = 0
    quiet_run = 0
    needed_quiet = max(1, math.ceil(cfg.silence_duration / cfg.frame_len - 1e-9))
    for i, v in enumerate(rms_values):
        t = i * cfg.frame_len
        if not speaking:
            if v > cfg.threshold:
                loud_run += 1
                if loud_run >= cfg.onset_frames:
                    events.append(("onset", t))
                    speaking = True
                    loud_run = 0
                    quiet_run = 0
            else:
                loud_run = 0
        else:
            if v > cfg.threshold:
                quiet_run = 0
            else:
                quiet_run += 1
                if quiet_run >= needed_quiet:
                    events.append(("silence", t))
                    speaking = False
                    quiet_run = 0
    return events


class TestFrameRms:
    def test_all_zero(self):
        assert frame_rms(AudioFrame(np.zeros(10), 0.0)) == 0.0

    def test_constant_half(self):
        assert frame_rms(AudioFrame(np.full(10, 0.5), 0.0)) == pytest.approx(0.5)

    def test_alternating(self):
        samples = np.array([0.3, -0.3] * 8)
        assert frame_rms(AudioFrame(samples, 0.0)) == pytest.approx(0.3)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            frame_rms(AudioFrame(np.array([]), 0.0))

    def test_out_of_range_amplitude_rejected(self):
        with pytest.raises(ValueError):
            AudioFrame(np.array([1.5]), 0.0)


class TestDetector:
    def cfg(self, **kw):
        defaults = dict(threshold=0.1, frame_len=0.02, onset_frames=3, silence_duration=0.8)
        defaults.update(kw)
        return VadConfig(**defaults)

    def test_continuous_silence_no_events(self):
        det = VoiceActivityDetector(self.cfg())
        assert det.run(const_frames([0.01] * 100)) == []

    def test_onset_after_debounce(self):
        # 1.0 s of silence (50 frames) then sustained speech: onset must land
        # on the third loud frame, t = 1.04 s
        rms = [0.01] * 50 + [0.5] * 20
        det = VoiceActivityDetector(self.cfg())
        events = det.run(const_frames(rms))
        assert len(events) == 1
        assert events[0].kind == VadEventKind.ONSET
        assert events[0].t == pytest.approx(1.04, abs=0.02)

    def test_single_loud_frame_is_debounced(self):
        rms = [0.01] * 10 + [0.5] + [0.01] * 10
        det = VoiceActivityDetector(self.cfg())
        assert det.run(const_frames(rms)) == []

    def test_silence_closes_command(self):
        rms = [0.5] * 10 + [0.01] * 45
        det = VoiceActivityDetector(self.cfg())
        events = det.run(const_frames(rms))
        assert [e.kind for e in events] == [VadEventKind.ONSET, VadEventKind.SILENCE]
        # quiet run starts at frame 10 (t=0.20); the 40th quiet frame that
        # completes the 0.8 s window is frame 49, t = 0.98
        assert events[1].t == pytest.approx(0.98, abs=0.021)

    def test_matches_reference_simulation(self):
        rng = random.Random(5)
        cfg = self.cfg()
        for _ in range(30):
            rms = [rng.choice([0.01, 0.02, 0.3, 0.5]) for _ in range(rng.randrange(0, 300))]
            det = VoiceActivityDetector(cfg)
            got = [(e.kind.value, e.t) for e in det.run(const_frames(rms))]
            expected = reference_events(rms, cfg)
            assert len(got) == len(expected)
            for (gk, gt), (ek, et) in zip(got, expected):
                assert gk == ek
                assert gt == pytest.approx(et, abs=cfg.frame_len)

    def test_out_of_order_frames_rejected(self):
        det = VoiceActivityDetector(self.cfg())
        det.step(AudioFrame(np.zeros(4), 1.0))
        with pytest.raises(ValueError):
            det.step(AudioFrame(np.zeros(4), 0.5))

    @given(st.lists(st.sampled_from([0.0, 0.05, 0.2, 0.9]), max_size=200))
    @settings(max_examples=80)
    def test_events_alternate(self, rms):
        det = VoiceActivityDetector(self.cfg(silence_duration=0.06))
        events = det.run(const_frames(rms))
        for a, b in zip(events, events[1:]):
            assert a.kind != b.kind
        if events:
            assert events[0].kind == VadEventKind.ONSET

    @given(st.lists(st.floats(min_value=0.0, max_value=1.0, allow_nan=False), max_size=120))
    @settings(max_examples=60)
    def test_deterministic(self, rms):
        cfg = self.cfg(silence_duration=0.1)
        a = VoiceActivityDetector(cfg).run(const_frames(rms))
        b = VoiceActivityDetector(cfg).run(const_frames(rms))
        assert a == b

    @given(st.lists(st.floats(min_value=0.0, max_value=1.0, allow_nan=False), max_size=120),
           st.floats(min_value=0.0, max_value=0.5), st.floats(min_value=0.0, max_value=0.5))
    @settings(max_examples=60)
    def test_raising_threshold_never_hastens_onset(self, rms, th_a, th_b):
        lo, hi = sorted((th_a, th_b))
        ev_lo = VoiceActivityDetector(self.cfg(threshold=lo)).run(const_frames(rms))
        ev_hi = VoiceActivityDetector(self.cfg(threshold=hi)).run(const_frames(rms))
        first_lo = next((e.t for e in ev_lo if e.kind == VadEventKind.ONSET), None)
        first_hi = next((e.t for e in ev_hi if e.kind == VadEventKind.ONSET), None)
        if first_hi is not None:
            assert first_lo is not None
            assert first_lo <= first_hi


class TestCalibrate:
    def test_perfect_silence_floors(self):
        assert calibrate(const_frames([0.0] * 50)) == 0.005

    def test_constant_ambient(self):
        assert calibrate(const_frames([0.02] * 50)) == pytest.approx(0.02)

    def test_formula_against_statistics_module(self):
        values = [0.01, 0.02, 0.03] * 20
        expected = statistics.mean(values) + 4 * statistics.pstdev(values)
        assert calibrate(const_frames(values)) == pytest.approx(expected)
        assert calibrate_from_rms(values) == pytest.approx(expected)

    def test_too_short_window_rejected(self):
        with pytest.raises(ValueError):
            calibrate(const_frames([0.0] * 49))  # 0.98 s


class TestWavDecode:
    def test_frames_have_expected_count_and_values(self):
        rate = 16000
        tone = 0.25 * np.sin(2 * np.pi * 440 * np.arange(rate) / rate)
        frames = frames_from_wav(make_wav(tone, rate))
        assert len(frames) == 50  # 1 s of audio at 20 ms frames
        assert all(f.samples.size == 320 for f in frames)
        assert frames[1].t == pytest.approx(0.02)
        assert frame_rms(frames[0]) == pytest.approx(0.25 / math.sqrt(2), rel=1e-2)

    def test_incomplete_tail_dropped(self):
        rate = 16000
        frames = frames_from_wav(make_wav(np.zeros(rate + 100), rate))
        assert len(frames) == 50

    def test_stereo_rejected(self):
        import io
        import wave

        buf = io.BytesIO()
        with wave.open(buf, "wb") as wf:
            wf.setnchannels(2)
            wf.setsampwidth(2)
            wf.setframerate(16000)
            wf.writeframes(b"\x00\x00\x00\x00" * 100)
        with pytest.raises(ValueError):
            frames_from_wav(buf.getvalue())

    def test_detector_finds_burst_in_wav(self):
        rate = 16000
        silence = np.zeros(rate)
        burst = 0.5 * np.sin(2 * np.pi * 300 * np.arange(rate) / rate)
        frames = frames_from_wav(make_wav(np.concatenate([silence, burst, silence]), rate))
        det = VoiceActivityDetector(VadConfig(threshold=0.1))
        events = det.run(frames)
        assert [e.kind for e in events] == [VadEventKind.ONSET, VadEventKind.SILENCE]
        assert events[0].t == pytest.approx(1.04, abs=0.021)

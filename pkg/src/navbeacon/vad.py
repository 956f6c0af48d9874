"""Energy-threshold voice activity detection.

A stream of fixed-length PCM frames is reduced to two event kinds: Onset
(speech started, debounced over a few consecutive loud frames) and Silence
(command finished, a sustained run of quiet frames). These two events
delimit the synchronized capture window.
"""

from __future__ import annotations

import io
import math
import wave
from dataclasses import dataclass
from enum import Enum

import numpy as np

DEFAULT_FRAME_LEN = 0.02  # seconds
DEFAULT_ONSET_FRAMES = 3
DEFAULT_SILENCE_DURATION = 0.8  # seconds
THRESHOLD_FLOOR = 0.005


@dataclass(frozen=True)
class AudioFrame:
    """One frame of mono PCM amplitudes normalized to [-1, 1]."""

    samples: np.ndarray
    t: float  # seconds, frame start

    def __post_init__(self) -> None:
        arr = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", arr)
        if arr.ndim != 1:
            raise ValueError(f"expected mono samples, got shape {arr.shape}")
        if arr.size and float(np.max(np.abs(arr))) > 1.0 + 1e-9:
            raise ValueError("sample amplitude outside [-1, 1]")


class VadEventKind(Enum):
    ONSET = "onset"
    SILENCE = "silence"


@dataclass(frozen=True)
class VadEvent:
    kind: VadEventKind
    t: float


@dataclass(frozen=True)
class VadConfig:
    threshold: float  # RMS amplitude
    frame_len: float = DEFAULT_FRAME_LEN
    onset_frames: int = DEFAULT_ONSET_FRAMES
    silence_duration: float = DEFAULT_SILENCE_DURATION

    def __post_init__(self) -> None:
        if not (0.0 <= self.threshold <= 1.0):
            raise ValueError(f"threshold must be in [0, 1], got {self.threshold}")
        if self.frame_len <= 0:
            raise ValueError(f"frame_len must be positive, got {self.frame_len}")
        if self.onset_frames < 1:
            raise ValueError(f"onset_frames must be >= 1, got {self.onset_frames}")
        if self.silence_duration <= 0:
            raise ValueError(f"silence_duration must be positive, got {self.silence_duration}")


def frame_rms(frame: AudioFrame) -> float:
    if frame.samples.size == 0:
        raise ValueError("cannot compute RMS of an empty frame")
    return float(np.sqrt(np.mean(np.square(frame.samples))))


class VoiceActivityDetector:
    """Per-stream detector; feed frames in time order via step().

    Events strictly alternate Onset, Silence, Onset, ... One instance per
    audio stream; instances are independent.
    """

    def __init__(self, cfg: VadConfig):
        self._cfg = cfg
        # frames of quiet needed to close a command; guard against the
        # duration/frame_len ratio landing a hair above an integer
        self._silence_frames = max(1, math.ceil(cfg.silence_duration / cfg.frame_len - 1e-9))
        self._speaking = False
        self._loud_run = 0
        self._quiet_run = 0
        self._last_t: float | None = None

    @property
    def speaking(self) -> bool:
        return self._speaking

    def step(self, frame: AudioFrame) -> VadEvent | None:
        if self._last_t is not None and frame.t <= self._last_t:
            raise ValueError(f"out-of-order frame: t={frame.t} after t={self._last_t}")
        self._last_t = frame.t

        loud = frame_rms(frame) > self._cfg.threshold
        if not self._speaking:
            if loud:
                self._loud_run += 1
                if self._loud_run >= self._cfg.onset_frames:
                    self._speaking = True
                    self._loud_run = 0
                    self._quiet_run = 0
                    return VadEvent(VadEventKind.ONSET, frame.t)
            else:
                self._loud_run = 0
        else:
            if loud:
                self._quiet_run = 0
            else:
                self._quiet_run += 1
                if self._quiet_run >= self._silence_frames:
                    self._speaking = False
                    self._loud_run = 0
                    self._quiet_run = 0
                    return VadEvent(VadEventKind.SILENCE, frame.t)
        return None

    def run(self, frames) -> list[VadEvent]:
        """Feed a whole frame sequence, collecting emitted events."""
        events = []
        for frame in frames:
            ev = self.step(frame)
            if ev is not None:
                events.append(ev)
        return events


def calibrate(ambient, frame_len: float = DEFAULT_FRAME_LEN) -> float:
    """Threshold from ambient audio: mean frame RMS + 4 sigma, floored.

    Needs at least one second of material so the noise estimate is not a
    fluke of a single frame.
    """
    frames = list(ambient)
    if len(frames) * frame_len < 1.0 - 1e-9:
        raise ValueError(
            f"calibration needs >= 1 s of ambient audio, got {len(frames) * frame_len:.3f} s"
        )
    rms = np.array([frame_rms(f) for f in frames])
    threshold = float(np.mean(rms) + 4.0 * np.std(rms))
    return max(threshold, THRESHOLD_FLOOR)


def calibrate_from_rms(rms_values, frame_len: float = DEFAULT_FRAME_LEN) -> float:
    """Same formula as calibrate() for pre-computed per-frame RMS values."""
    values = np.asarray(list(rms_values), dtype=np.float64)
    if values.size * frame_len < 1.0 - 1e-9:
        raise ValueError(
            f"calibration needs >= 1 s of ambient audio, got {values.size * frame_len:.3f} s"
        )
    threshold = float(np.mean(values) + 4.0 * np.std(values))
    return max(threshold, THRESHOLD_FLOOR)


def frames_from_wav(data: bytes, frame_len: float = DEFAULT_FRAME_LEN) -> list[AudioFrame]:
    """Decode PCM16 mono WAV bytes into normalized fixed-length frames.

    An incomplete trailing frame is dropped.
    """
    with wave.open(io.BytesIO(data), "rb") as wf:
        if wf.getnchannels() != 1:
            raise ValueError(f"expected mono WAV, got {wf.getnchannels()} channels")
        if wf.getsampwidth() != 2:
            raise ValueError(f"expected 16-bit PCM, got {8 * wf.getsampwidth()}-bit")
        rate = wf.getframerate()
        raw = wf.readframes(wf.getnframes())

    samples = np.frombuffer(raw, dtype=np.int16).astype(np.float64) / 32768.0
    per_frame = int(round(rate * frame_len))
    if per_frame < 1:
        raise ValueError(f"frame_len {frame_len} too short for rate {rate}")

    frames = []
    n_whole = samples.size // per_frame
    for i in range(n_whole):
        chunk = samples[i * per_frame : (i + 1) * per_frame]
        frames.append(AudioFrame(chunk, t=i * frame_len))
    return frames

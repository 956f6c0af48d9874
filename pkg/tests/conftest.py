import io
import wave

import numpy as np
import pytest

from navbeacon.clustering import PointerSample
from navbeacon.geometry import Vec3
from navbeacon.stub_backend import StubModelServer


def make_wav(samples: np.ndarray, rate: int = 16000) -> bytes:
    """Encode float samples in [-1, 1] as PCM16 mono WAV bytes."""
    pcm = np.clip(np.asarray(samples) * 32767.0, -32768, 32767).astype(np.int16)
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(rate)
        wf.writeframes(pcm.tobytes())
    return buf.getvalue()


def dwell(t0: float, x: float, y: float, n: int = 5, period: float = 0.1):
    """n pointer samples holding still at (x, y) starting at t0."""
    return [PointerSample(t0 + i * period, Vec3(x, y, 0.0)) for i in range(n)]


def window_samples(*dwells):
    """Concatenate dwells that are already in time order."""
    out = []
    for d in dwells:
        out.extend(d)
    return out


@pytest.fixture
def stub_server():
    """Factory for stub model servers; stops them all at teardown."""
    started = []

    def factory(**kwargs) -> StubModelServer:
        server = StubModelServer(**kwargs).start()
        started.append(server)
        return server

    yield factory
    for server in started:
        server.stop()

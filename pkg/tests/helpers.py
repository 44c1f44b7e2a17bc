"""Byte-level fixture builders and independent numeric oracles for the tests.

The MIDI and WAV builders construct files directly from the container
specifications so parser tests never depend on the code under test.  The
quadrature oracle integrates the t density numerically as an independent
check on the closed-form tail probabilities.
"""

from __future__ import annotations

import math
import struct

import numpy as np

from perfeat.smf import MidiNote, TrackCategory

# ----------------------------------------------------------------- SMF bytes


def vlq(value: int) -> bytes:
    """Variable-length quantity: big-endian 7-bit groups, high bit chains."""
    if value < 0 or value > 0x0FFFFFFF:
        raise ValueError("vlq out of range")
    groups = [value & 0x7F]
    value >>= 7
    while value:
        groups.append((value & 0x7F) | 0x80)
        value >>= 7
    return bytes(reversed(groups))


def ev(delta: int, *payload: int) -> bytes:
    return vlq(delta) + bytes(payload)


def note_on(delta: int, key: int, velocity: int, channel: int = 0) -> bytes:
    return ev(delta, 0x90 | channel, key, velocity)


def note_off(delta: int, key: int, velocity: int = 64, channel: int = 0) -> bytes:
    return ev(delta, 0x80 | channel, key, velocity)


def control(delta: int, controller: int, value: int, channel: int = 0) -> bytes:
    return ev(delta, 0xB0 | channel, controller, value)


def set_tempo(delta: int, us_per_quarter: int) -> bytes:
    return ev(delta, 0xFF, 0x51, 0x03) + us_per_quarter.to_bytes(3, "big")


def end_of_track(delta: int = 0) -> bytes:
    return ev(delta, 0xFF, 0x2F, 0x00)


def track(*events: bytes, eot_delta: int = 0, append_eot: bool = True) -> bytes:
    body = b"".join(events)
    if append_eot:
        body += end_of_track(eot_delta)
    return b"MTrk" + struct.pack(">I", len(body)) + body


def smf(*tracks: bytes, division: int = 480, fmt: int = 1) -> bytes:
    header = b"MThd" + struct.pack(">IHHH", 6, fmt, len(tracks), division)
    return header + b"".join(tracks)


# ----------------------------------------------------------------- WAV bytes


def wav(
    samples,
    sample_rate: int,
    fmt: int = 1,
    bits: int = 16,
    channels: int = 1,
    extra_chunk: bool = False,
    truncate_payload: int = 0,
) -> bytes:
    """RIFF/WAVE bytes; samples are raw codes (int16) or floats (float32)."""
    samples = np.asarray(samples)
    if fmt == 1 and bits == 16:
        payload = samples.astype("<i2").tobytes()
    elif fmt == 3 and bits == 32:
        payload = samples.astype("<f4").tobytes()
    else:
        payload = samples.astype("<i2").tobytes()
    declared = len(payload)  # size header keeps the full length when truncating
    if truncate_payload:
        payload = payload[:-truncate_payload]
    block = channels * bits // 8
    fmt_chunk = struct.pack("<HHIIHH", fmt, channels, sample_rate, sample_rate * block, block, bits)
    chunks = b"fmt " + struct.pack("<I", len(fmt_chunk)) + fmt_chunk
    if extra_chunk:
        chunks += b"LIST" + struct.pack("<I", 4) + b"INFO"
    chunks += b"data" + struct.pack("<I", declared) + payload
    return b"RIFF" + struct.pack("<I", 4 + len(chunks)) + b"WAVE" + chunks


def pcm16(x) -> np.ndarray:
    """Float samples in [-1, 1] to int16 codes."""
    return np.clip(np.round(np.asarray(x) * 32768.0), -32768, 32767).astype("<i2")


# ------------------------------------------------------------- note fixtures


def note(
    onset: float,
    duration: float,
    key: int = 60,
    velocity: int = 100,
    volume_cc: int = 127,
    track_id: int = 0,
    channel: int = 0,
    category: TrackCategory = TrackCategory.UNANNOTATED,
) -> MidiNote:
    return MidiNote(
        track_id=track_id,
        channel=channel,
        key=key,
        onset=onset,
        duration=duration,
        velocity=velocity,
        volume_cc=volume_cc,
        category=category,
    )


# ------------------------------------------------------------ numeric oracle


def t_two_tailed_quadrature(t: float, df: float, points: int = 200_001) -> float:
    """Two-tailed t tail probability by direct numeric integration.

    Substituting x = sqrt(df) tan(theta) turns the tail integral into a
    smooth integral of cos(theta)^(df - 1) over a finite interval, which the
    trapezoid rule handles to well below 1e-8.
    """
    t = abs(float(t))
    constant = math.exp(
        math.lgamma((df + 1) / 2.0) - math.lgamma(df / 2.0)
    ) / math.sqrt(df * math.pi)
    theta_start = math.atan(t / math.sqrt(df))
    theta = np.linspace(theta_start, math.pi / 2.0, points)
    integrand = np.cos(theta) ** (df - 1.0)
    tail = constant * math.sqrt(df) * np.trapezoid(integrand, theta)
    return float(2.0 * tail)

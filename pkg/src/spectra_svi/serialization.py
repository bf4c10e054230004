"""Plain-text serialization for block profiles and channel sets.

One matrix entry per "(re,im)" token, 17 significant digits, so float64
values survive a write/read cycle bitwise. Layout:

    profile <block count>
    block <index> dim <d>
    (re,im) (re,im) ...        one line per matrix row

    channels <user count>
    channel <tx> <rx> shape <rows> <cols>
    (re,im) ...

Used for golden fixtures and checkpoints; not a wire format.
"""

from __future__ import annotations

import os

import numpy as np

from .linalg import as_hermitian
from .mimo import ChannelSet
from .problem import BlockProfile


def _format_entry(z: complex) -> str:
    return f"({z.real:.17g},{z.imag:.17g})"


def _matrix_lines(A: np.ndarray) -> list[str]:
    return [" ".join(_format_entry(z) for z in row) for row in A]


def _parse_entry(token: str, where: str) -> complex:
    if not (token.startswith("(") and token.endswith(")")):
        raise ValueError(f"{where}: malformed entry {token!r}")
    parts = token[1:-1].split(",")
    if len(parts) != 2:
        raise ValueError(f"{where}: malformed entry {token!r}")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise ValueError(f"{where}: malformed entry {token!r}") from exc


def _parse_matrix(lines: list[str], start: int, rows: int,
                  cols: int) -> tuple[np.ndarray, int]:
    A = np.zeros((rows, cols), dtype=complex)
    for r in range(rows):
        idx = start + r
        if idx >= len(lines):
            raise ValueError(f"line {idx + 1}: unexpected end of matrix data")
        tokens = lines[idx].split()
        if len(tokens) != cols:
            raise ValueError(
                f"line {idx + 1}: expected {cols} entries, got {len(tokens)}")
        for c, tok in enumerate(tokens):
            A[r, c] = _parse_entry(tok, f"line {idx + 1}")
    return A, start + rows


def profile_to_text(profile: BlockProfile) -> str:
    lines = [f"profile {len(profile)}"]
    for i, block in enumerate(profile.blocks):
        lines.append(f"block {i} dim {block.shape[0]}")
        lines.extend(_matrix_lines(block))
    return "\n".join(lines) + "\n"


def profile_from_text(text: str) -> BlockProfile:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("profile "):
        raise ValueError("line 1: expected 'profile <count>' header")
    count = int(lines[0].split()[1])
    blocks = []
    pos = 1
    for i in range(count):
        if pos >= len(lines):
            raise ValueError(f"line {pos + 1}: missing block {i} header")
        parts = lines[pos].split()
        if len(parts) != 4 or parts[0] != "block" or parts[2] != "dim":
            raise ValueError(
                f"line {pos + 1}: expected 'block {i} dim <d>', got {lines[pos]!r}")
        if int(parts[1]) != i:
            raise ValueError(f"line {pos + 1}: block index {parts[1]}, expected {i}")
        dim = int(parts[3])
        A, pos = _parse_matrix(lines, pos + 1, dim, dim)
        blocks.append(as_hermitian(A))
    if pos != len(lines):
        raise ValueError(f"line {pos + 1}: trailing data after last block")
    return BlockProfile(tuple(blocks))


def channels_to_text(channels: ChannelSet) -> str:
    lines = [f"channels {channels.users}"]
    for j, row in enumerate(channels.H):
        for i, H in enumerate(row):
            lines.append(f"channel {j} {i} shape {H.shape[0]} {H.shape[1]}")
            lines.extend(_matrix_lines(H))
    return "\n".join(lines) + "\n"


def channels_from_text(text: str) -> ChannelSet:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("channels "):
        raise ValueError("line 1: expected 'channels <count>' header")
    users = int(lines[0].split()[1])
    grid: list[list[np.ndarray]] = [[None] * users for _ in range(users)]
    pos = 1
    for j in range(users):
        for i in range(users):
            if pos >= len(lines):
                raise ValueError(f"line {pos + 1}: missing channel {j} {i}")
            parts = lines[pos].split()
            if (len(parts) != 6 or parts[0] != "channel" or parts[3] != "shape"
                    or int(parts[1]) != j or int(parts[2]) != i):
                raise ValueError(
                    f"line {pos + 1}: expected 'channel {j} {i} shape <r> <c>', "
                    f"got {lines[pos]!r}")
            rows, cols = int(parts[4]), int(parts[5])
            grid[j][i], pos = _parse_matrix(lines, pos + 1, rows, cols)
    if pos != len(lines):
        raise ValueError(f"line {pos + 1}: trailing data after last channel")
    return ChannelSet(tuple(tuple(row) for row in grid))


def save_profile(profile: BlockProfile, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="ascii") as f:
        f.write(profile_to_text(profile))


def load_profile(path: str | os.PathLike) -> BlockProfile:
    with open(path, "r", encoding="ascii") as f:
        return profile_from_text(f.read())


def save_channels(channels: ChannelSet, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="ascii") as f:
        f.write(channels_to_text(channels))


def load_channels(path: str | os.PathLike) -> ChannelSet:
    with open(path, "r", encoding="ascii") as f:
        return channels_from_text(f.read())

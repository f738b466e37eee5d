"""Byte-at-a-time identifier scanner; deliberately naive."""

ALLOWED = set(b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_.")


def identifier_runs(data: bytes, min_len: int = 4) -> set[str]:
    out, run = set(), []
    for b in data + b"\0":
        if b in ALLOWED:
            run.append(chr(b))
            continue
        if len(run) >= min_len:
            out.add("".join(run))
        run = []
    return out

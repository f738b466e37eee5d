"""Direct-call graph recovery for AArch64 ELF64 images and reachability
from app entry points to catalogued sensitive APIs."""

from __future__ import annotations

import struct
from collections import deque
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .catalog import ApiRule
from .errors import NoTextSection, NotElf, WrongClassOrEndianness
from .evidence import AccessEvidence
from .il2cpp import MetadataTable

ELF_MAGIC = b"\x7fELF"
ELFCLASS64 = 2
ELFDATA2LSB = 1
EM_AARCH64 = 183

BL_OPCODE = 0b100101
IMM26_MASK = 0x03FFFFFF
IMM26_SIGN = 0x02000000

# substring matching only for catalog names at least this long
MIN_SUBSTRING_MATCH = 8


@dataclass(frozen=True)
class TextSection:
    addr: int
    data: bytes


@dataclass(frozen=True)
class NamedCallGraph:
    nodes: frozenset[int]
    edges: frozenset[tuple[int, int]]
    labels: Mapping[int, str]
    # "exact" or "approx" per edge
    confidence: Mapping[tuple[int, int], str] = field(default_factory=dict, compare=False)

    def name(self, node: int) -> str:
        return self.labels.get(node, f"sub_{node:X}")


def read_text_section(elf: bytes) -> TextSection:
    if len(elf) < 64 or elf[:4] != ELF_MAGIC:
        raise NotElf("missing ELF magic")
    if elf[4] != ELFCLASS64 or elf[5] != ELFDATA2LSB:
        raise WrongClassOrEndianness(f"class={elf[4]} data={elf[5]}; need ELF64 little-endian")
    (_type, machine, _ver, _entry, _phoff, shoff, _flags, _ehsize, _phentsize, _phnum,
     shentsize, shnum, shstrndx) = struct.unpack_from("<HHIQQQIHHHHHH", elf, 16)
    if machine != EM_AARCH64:
        raise WrongClassOrEndianness(f"e_machine={machine}; need AArch64")
    if shoff == 0 or shnum == 0 or shoff + shnum * shentsize > len(elf) or shentsize < 64:
        raise NoTextSection("no usable section header table")

    def header(i):
        return struct.unpack_from("<IIQQQQIIQQ", elf, shoff + i * shentsize)

    if shstrndx >= shnum:
        raise NoTextSection("section name table index out of range")
    strtab = header(shstrndx)
    names = elf[strtab[4]:strtab[4] + strtab[5]]
    for i in range(shnum):
        sh_name, _sh_type, _flags, addr, offset, size, *_ = header(i)
        end = names.find(b"\0", sh_name)
        if names[sh_name:end if end >= 0 else None] == b".text":
            if offset + size > len(elf):
                raise NoTextSection(".text extends past end of file")
            return TextSection(addr, elf[offset:offset + size])
    raise NoTextSection("no .text section")


def decode_bl(words: np.ndarray, base: int) -> tuple[np.ndarray, np.ndarray]:
    """Addresses and targets of every BL among little-endian 32-bit words."""
    idx = np.flatnonzero((words >> 26) == BL_OPCODE)
    imm = (words[idx] & IMM26_MASK).astype(np.int64)
    imm -= (imm & IMM26_SIGN) << 1
    addrs = base + idx.astype(np.int64) * 4
    return addrs, addrs + imm * 4


def extract_call_edges(elf: bytes, metadata: MetadataTable) -> NamedCallGraph:
    text = read_text_section(elf)
    base, size = text.addr, len(text.data)
    words = np.frombuffer(text.data[:size - size % 4], dtype="<u4")
    addrs, targets = decode_bl(words, base)
    inside = (targets >= base) & (targets < base + size)
    addrs, targets = addrs[inside], targets[inside]

    labels: dict[int, str] = {}
    for name in sorted(metadata.name_to_offset):
        labels.setdefault(metadata.name_to_offset[name], name)

    # only functions that live in .text can own an instruction
    starts = np.array(sorted(o for o in labels if base <= o < base + size), dtype=np.int64)
    slot = np.searchsorted(starts, addrs, side="right") - 1
    callers = np.where(slot >= 0, starts[np.maximum(slot, 0)] if len(starts) else addrs, addrs)

    # a caller attribution is approximate when an unlabeled call target sits
    # between the label and the instruction, or when no label precedes it
    unlabeled = np.array(sorted(set(targets.tolist()) - set(labels)), dtype=np.int64)
    between = (np.searchsorted(unlabeled, addrs, side="right")
               - np.searchsorted(unlabeled, callers, side="right"))
    approx = (slot < 0) | (between > 0)

    confidence: dict[tuple[int, int], str] = {}
    for caller, callee, rough in zip(callers.tolist(), targets.tolist(), approx.tolist()):
        edge = (caller, callee)
        if confidence.get(edge) != "exact":
            confidence[edge] = "approx" if rough else "exact"

    edges = frozenset(confidence)
    nodes = frozenset(labels) | {n for e in edges for n in e}
    return NamedCallGraph(nodes, edges, MappingProxyType(labels), MappingProxyType(confidence))


def name_matches(label: str, rule: ApiRule) -> bool:
    target = rule.name
    if label == target:
        return True
    if "::" in label:
        owner, _, member = label.rpartition("::")
        if member == target:
            return True
        if rule.kind == "class" and owner.rsplit(".", 1)[-1] == target:
            return True
    elif rule.kind == "class" and label.rsplit(".", 1)[-1] == target:
        return True
    return len(target) >= MIN_SUBSTRING_MATCH and target in label


def _shortest_root_path(graph: NamedCallGraph, node: int, preds: dict[int, list[int]],
                        roots: set[int]) -> list[int]:
    if node in roots:
        return [node]
    parent = {node: None}
    queue = deque([node])
    while queue:
        cur = queue.popleft()
        for p in preds.get(cur, ()):
            if p in parent:
                continue
            parent[p] = cur
            if p in roots:
                path = [p]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return path
            queue.append(p)
    # only reachable through a cycle: no entry point to report
    return [node]


def reach_sensitive(graph: NamedCallGraph, rules: Iterable[ApiRule]) -> list[AccessEvidence]:
    rules = [r for r in rules if r.kind in ("api", "class")]
    preds: dict[int, list[int]] = {}
    indegree = dict.fromkeys(graph.nodes, 0)
    for caller, callee in sorted(graph.edges):
        if caller != callee:
            preds.setdefault(callee, []).append(caller)
            indegree[callee] += 1
    roots = {n for n, d in indegree.items() if d == 0}

    out: list[AccessEvidence] = []
    seen = set()
    for node in sorted(graph.labels):
        label = graph.labels[node]
        for rule in rules:
            key = (node, rule.data_type, rule.name)
            if key in seen or not name_matches(label, rule):
                continue
            seen.add(key)
            path = _shortest_root_path(graph, node, preds, roots)
            names = tuple(graph.name(n) for n in path)
            out.append(AccessEvidence(rule.data_type, rule.name, names, detail=label))
    return out


def presence_evidence(names: Iterable[str], rules: Iterable[ApiRule]) -> list[AccessEvidence]:
    """Evidence from bare name presence (string scans, Mono assemblies)."""
    rules = [r for r in rules if r.kind in ("api", "class")]
    out, seen = [], set()
    for name in sorted(set(names)):
        for rule in rules:
            if (rule.data_type, rule.name) in seen or not name_matches(name, rule):
                continue
            seen.add((rule.data_type, rule.name))
            out.append(AccessEvidence(rule.data_type, rule.name, (rule.name,), detail=name))
    return out

"""Little-endian ELF shared-object parsing.

Only what library fingerprinting needs is decoded: the section header
table, the symbol tables and the raw bytes of read-only data. Both ELF32
and ELF64 are handled; big-endian objects are rejected.
"""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass, field

from .errors import MalformedElf, NotAnElf

ELF_MAGIC = b"\x7fELF"
ELFCLASS32 = 1
ELFCLASS64 = 2
ELFDATA2LSB = 1

SHT_SYMTAB = 2
SHT_NOBITS = 8
SHT_DYNSYM = 11

STT_FUNC = 2
STT_GNU_IFUNC = 10
SHN_UNDEF = 0
SHN_LORESERVE = 0xFF00
SHN_XINDEX = 0xFFFF

DEFAULT_MIN_STRING_LEN = 4

_MACHINES = {
    3: "x86",
    8: "mips",
    40: "arm",
    62: "x86_64",
    183: "aarch64",
    243: "riscv",
}

# (ehdr fmt, shdr fmt, sym fmt); symbol field order differs between classes.
_LAYOUT = {
    ELFCLASS32: ("<16sHHIIIIIHHHHHH", "<IIIIIIIIII", "<IIIBBH"),
    ELFCLASS64: ("<16sHHIQQQIHHHHHH", "<IIQQQQIIQQ", "<IBBHQQ"),
}

_STUB_SECTION = re.compile(r"^\.(plt|got)(\.|$)")
_RODATA_SECTION = re.compile(r"^\.rodata(1|\..*)?$")


@dataclass(frozen=True)
class Section:
    name: str
    type: int
    flags: int
    offset: int
    size: int
    link: int
    entsize: int


@dataclass(eq=False)
class ElfArtifact:
    machine: str
    elf_class: int
    sections: list[Section]
    strings: list[str] = field(default_factory=list)
    functions: list[str] = field(default_factory=list)
    stripped: bool = True
    data: bytes = field(default=b"", repr=False)

    def section(self, name: str) -> Section | None:
        for s in self.sections:
            if s.name == name:
                return s
        return None

    def section_bytes(self, sec: Section) -> bytes:
        if sec.type == SHT_NOBITS:
            return b""
        return self.data[sec.offset:sec.offset + sec.size]


def _cstr(blob: bytes, offset: int) -> str:
    if offset >= len(blob):
        return ""
    end = blob.find(b"\0", offset)
    if end < 0:
        end = len(blob)
    return blob[offset:end].decode("latin-1")


def _read_header(data: bytes):
    if data[:4] != ELF_MAGIC:
        raise NotAnElf("bad ELF magic")
    if len(data) < 16:
        raise MalformedElf("truncated ELF identification")
    elf_class, encoding = data[4], data[5]
    if elf_class not in _LAYOUT:
        raise MalformedElf(f"unknown ELF class {elf_class}")
    if encoding != ELFDATA2LSB:
        raise MalformedElf("only little-endian ELF is supported")
    ehdr_fmt = _LAYOUT[elf_class][0]
    if len(data) < struct.calcsize(ehdr_fmt):
        raise MalformedElf("truncated ELF header")
    return elf_class, struct.unpack_from(ehdr_fmt, data, 0)


def _read_sections(data: bytes, elf_class: int, ehdr) -> list[Section]:
    (_, _, _, _, _, _, e_shoff, _, _, _, _,
     e_shentsize, e_shnum, e_shstrndx) = ehdr
    shdr_fmt = _LAYOUT[elf_class][1]
    shdr_size = struct.calcsize(shdr_fmt)
    if e_shoff == 0:
        return []
    if e_shentsize != shdr_size:
        raise MalformedElf(f"unexpected section header size {e_shentsize}")
    if e_shoff + shdr_size > len(data):
        raise MalformedElf("section header table lies past end of file")

    def raw(i):
        name, typ, flags, _, off, size, link, _, _, entsize = struct.unpack_from(
            shdr_fmt, data, e_shoff + i * shdr_size)
        return name, typ, flags, off, size, link, entsize

    # extended numbering keeps the real counts in section 0
    first = raw(0)
    if e_shnum == 0:
        e_shnum = first[4]
    if e_shstrndx == SHN_XINDEX:
        e_shstrndx = first[5]  # sh_link of section 0
    if e_shoff + e_shnum * shdr_size > len(data):
        raise MalformedElf("section header table lies past end of file")

    headers = [raw(i) for i in range(e_shnum)]
    for _, typ, _, off, size, _, _ in headers:
        if typ != SHT_NOBITS and off + size > len(data):
            raise MalformedElf("section contents lie past end of file")

    names = b""
    if 0 < e_shstrndx < e_shnum:
        _, _, _, off, size, _, _ = headers[e_shstrndx]
        names = data[off:off + size]
    return [
        Section(_cstr(names, n), typ, flags, off, size, link, entsize)
        for n, typ, flags, off, size, link, entsize in headers
    ]


def _symbols(artifact: ElfArtifact, table: Section):
    """Yield (name, type, shndx) for every entry of a symbol table."""
    fmt = _LAYOUT[artifact.elf_class][2]
    size = struct.calcsize(fmt)
    if table.entsize and table.entsize != size:
        return
    if not 0 <= table.link < len(artifact.sections):
        return
    strtab = artifact.section_bytes(artifact.sections[table.link])
    blob = artifact.section_bytes(table)
    for off in range(0, len(blob) - size + 1, size):
        f = struct.unpack_from(fmt, blob, off)
        if artifact.elf_class == ELFCLASS32:
            name, _, _, info, _, shndx = f
        else:
            name, info, _, shndx, _, _ = f
        yield _cstr(strtab, name), info & 0xF, shndx


def extract_functions(artifact: ElfArtifact) -> list[str]:
    """Names of function symbols defined in this object.

    Both ``.symtab`` and ``.dynsym`` are read, so exported names survive a
    standard strip. Undefined imports and symbols living in ``.plt``/``.got``
    stubs are dropped. Order follows the tables, duplicates removed.
    """
    seen: dict[str, None] = {}
    tables = [s for s in artifact.sections if s.type == SHT_SYMTAB]
    tables += [s for s in artifact.sections if s.type == SHT_DYNSYM]
    for table in tables:
        for name, typ, shndx in _symbols(artifact, table):
            if not name or typ not in (STT_FUNC, STT_GNU_IFUNC):
                continue
            if shndx == SHN_UNDEF:
                continue
            if shndx < SHN_LORESERVE:
                if shndx >= len(artifact.sections):
                    continue
                if _STUB_SECTION.match(artifact.sections[shndx].name):
                    continue
            seen.setdefault(name, None)
    return list(seen)


def printable_runs(blob: bytes, min_len: int = DEFAULT_MIN_STRING_LEN) -> list[str]:
    """Maximal runs of printable ASCII (0x20-0x7E) at least ``min_len`` long."""
    if min_len < 1:
        raise ValueError("min_len must be at least 1")
    pattern = re.compile(rb"[\x20-\x7e]{%d,}" % min_len)
    return [m.group().decode("ascii") for m in pattern.finditer(blob)]


def rodata_sections(artifact: ElfArtifact) -> list[Section]:
    return [s for s in artifact.sections
            if _RODATA_SECTION.match(s.name) and s.type != SHT_NOBITS]


def extract_strings(artifact: ElfArtifact, min_len: int = DEFAULT_MIN_STRING_LEN) -> list[str]:
    """Printable strings from read-only data, or the whole file if there is none.

    Runs never span section boundaries.
    """
    sections = rodata_sections(artifact)
    if not sections:
        return printable_runs(artifact.data, min_len)
    out: list[str] = []
    for sec in sections:
        out.extend(printable_runs(artifact.section_bytes(sec), min_len))
    return out


def is_stripped(artifact: ElfArtifact) -> bool:
    return not extract_functions(artifact)


def parse_elf(data: bytes, min_string_len: int = DEFAULT_MIN_STRING_LEN) -> ElfArtifact:
    """Parse ``data`` and populate strings, functions and the stripped flag.

    Raises NotAnElf for a wrong magic number and MalformedElf when the
    header or section table is inconsistent with the file length.
    """
    data = bytes(data)
    elf_class, ehdr = _read_header(data)
    sections = _read_sections(data, elf_class, ehdr)
    artifact = ElfArtifact(
        machine=_MACHINES.get(ehdr[2], f"em_{ehdr[2]}"),
        elf_class=elf_class,
        sections=sections,
        data=data,
    )
    artifact.functions = extract_functions(artifact)
    artifact.stripped = not artifact.functions
    artifact.strings = extract_strings(artifact, min_string_len)
    return artifact

"""PDF-to-markdown ingestion for prompt grounding.

The extractor is deliberately small and self-contained: it walks the
page tree, inflates FlateDecode content streams, replays the text
operators (Tj/TJ/'/"), groups shows into lines and paragraphs by the
text-positioning moves, and promotes lines set well above the document's
dominant font size to markdown headings.  Page breaks become horizontal
rules.  The contract is best-effort plain text with structure hints,
not layout preservation; image-only pages simply contribute nothing.
"""

from __future__ import annotations

import base64
import hashlib
import re
import zlib
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import NamedTuple

MAX_PDF_BYTES = 20 * 1024 * 1024
TRUNCATION_MARKER = "\n\n[truncated]"

# paragraph gap: vertical move clearly larger than one line of the current size
_GAP_FACTOR = 1.6
_H1_FACTOR = 1.5
_H2_FACTOR = 1.15


class PdfError(Exception):
    code = "pdf-error"


class NotAPdfError(PdfError):
    code = "not-a-pdf"


class EncryptedPdfError(PdfError):
    code = "encrypted-pdf"


class TooLargeError(PdfError):
    code = "too-large"


@dataclass(frozen=True)
class Document:
    id: str
    filename: str
    markdown: str
    page_count: int
    byte_size: int
    uploaded_at: str
    extraction_empty: bool = False


# ---------------------------------------------------------------------------
# low-level PDF object parsing

class _Ref(NamedTuple):
    num: int
    gen: int


class _ParseError(Exception):
    pass


_WS = b"\x00\t\n\x0c\r "
_NUM_RE = re.compile(rb"[+-]?(?:\d+\.\d*|\.\d+|\d+)")
_REF_RE = re.compile(rb"(\d+)\s+(\d+)\s+R(?![A-Za-z0-9])")
_NAME_RE = re.compile(rb"/([^\x00\t\n\x0c\r ()<>\[\]{}/%]*)")
_OBJ_RE = re.compile(rb"(\d+)\s+(\d+)\s+obj\b")
_OP_RE = re.compile(rb"[A-Za-z'\"][A-Za-z0-9'\"*]*|'")


def _skip_ws(data: bytes, pos: int) -> int:
    n = len(data)
    while pos < n:
        c = data[pos]
        if c in _WS:
            pos += 1
        elif c == 0x25:  # % comment runs to end of line
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
        else:
            break
    return pos


def _parse_name(data: bytes, pos: int):
    m = _NAME_RE.match(data, pos)
    if not m:
        raise _ParseError("bad name")
    raw = m.group(1)
    if b"#" in raw:
        raw = re.sub(rb"#([0-9A-Fa-f]{2})", lambda g: bytes([int(g.group(1), 16)]), raw)
    return raw.decode("latin-1"), m.end()


def _parse_literal_string(data: bytes, pos: int):
    pos += 1  # past "("
    out = bytearray()
    depth = 1
    n = len(data)
    while pos < n:
        c = data[pos]
        if c == 0x5C:  # backslash
            pos += 1
            if pos >= n:
                break
            e = data[pos]
            if e in b"nrtbf":
                out.append({0x6E: 10, 0x72: 13, 0x74: 9, 0x62: 8, 0x66: 12}[e])
                pos += 1
            elif e in b"01234567":
                digits = bytearray()
                while pos < n and len(digits) < 3 and data[pos] in b"01234567":
                    digits.append(data[pos])
                    pos += 1
                out.append(int(digits, 8) & 0xFF)
            elif e in b"\r\n":  # escaped newline: continuation
                pos += 1
                if e == 0x0D and data[pos : pos + 1] == b"\n":
                    pos += 1
            else:
                out.append(e)
                pos += 1
        elif c == 0x28:
            depth += 1
            out.append(c)
            pos += 1
        elif c == 0x29:
            depth -= 1
            if depth == 0:
                return bytes(out), pos + 1
            out.append(c)
            pos += 1
        else:
            out.append(c)
            pos += 1
    raise _ParseError("unterminated string")


def _parse_hex_string(data: bytes, pos: int):
    end = data.find(b">", pos + 1)
    if end == -1:
        raise _ParseError("unterminated hex string")
    digits = re.sub(rb"[^0-9A-Fa-f]", b"", data[pos + 1 : end])
    if len(digits) % 2:
        digits += b"0"
    return bytes.fromhex(digits.decode("ascii")), end + 1


def _parse_array(data: bytes, pos: int):
    pos += 1
    items = []
    while True:
        pos = _skip_ws(data, pos)
        if pos >= len(data):
            raise _ParseError("unterminated array")
        if data[pos] == 0x5D:  # ]
            return items, pos + 1
        value, pos = _parse_value(data, pos)
        items.append(value)


def _parse_dict(data: bytes, pos: int):
    pos += 2
    entries = {}
    while True:
        pos = _skip_ws(data, pos)
        if data.startswith(b">>", pos):
            return entries, pos + 2
        if pos >= len(data):
            raise _ParseError("unterminated dict")
        key, pos = _parse_name(data, pos)
        value, pos = _parse_value(data, pos)
        entries[key] = value


def _parse_value(data: bytes, pos: int):
    pos = _skip_ws(data, pos)
    if pos >= len(data):
        raise _ParseError("unexpected end of data")
    c = data[pos : pos + 1]
    if data.startswith(b"<<", pos):
        return _parse_dict(data, pos)
    if c == b"<":
        return _parse_hex_string(data, pos)
    if c == b"(":
        return _parse_literal_string(data, pos)
    if c == b"[":
        return _parse_array(data, pos)
    if c == b"/":
        return _parse_name(data, pos)
    if data.startswith(b"true", pos):
        return True, pos + 4
    if data.startswith(b"false", pos):
        return False, pos + 5
    if data.startswith(b"null", pos):
        return None, pos + 4
    ref = _REF_RE.match(data, pos)
    if ref:
        return _Ref(int(ref.group(1)), int(ref.group(2))), ref.end()
    num = _NUM_RE.match(data, pos)
    if num:
        text = num.group(0)
        return (float(text) if b"." in text else int(text)), num.end()
    raise _ParseError(f"unparseable value at byte {pos}")


def _collect_objects(data: bytes) -> dict:
    objects = {}
    for m in _OBJ_RE.finditer(data):
        try:
            value, pos = _parse_value(data, m.end())
        except (_ParseError, RecursionError):
            continue
        pos = _skip_ws(data, pos)
        stream_at = None
        if data.startswith(b"stream", pos):
            p = pos + 6
            if data[p : p + 2] == b"\r\n":
                p += 2
            elif data[p : p + 1] in (b"\n", b"\r"):
                p += 1
            stream_at = p
        objects[(int(m.group(1)), int(m.group(2)))] = (value, stream_at)
    return objects


def _resolve(objects: dict, value, hops: int = 0):
    while isinstance(value, _Ref) and hops < 32:
        value = objects.get((value.num, value.gen), (None, None))[0]
        hops += 1
    return value


def _stream_data(data: bytes, objects: dict, key) -> bytes | None:
    value, stream_at = objects.get(key, (None, None))
    if stream_at is None or not isinstance(value, dict):
        return None
    length = _resolve(objects, value.get("Length"))
    if isinstance(length, int) and 0 <= length <= len(data) - stream_at:
        raw = data[stream_at : stream_at + length]
    else:
        end = data.find(b"endstream", stream_at)
        if end == -1:
            return None
        raw = data[stream_at:end].rstrip(b"\r\n")
    filters = _resolve(objects, value.get("Filter"))
    if filters is None:
        filters = []
    elif not isinstance(filters, list):
        filters = [filters]
    for filt in filters:
        name = _resolve(objects, filt)
        try:
            if name == "FlateDecode":
                raw = zlib.decompress(raw)
            elif name == "ASCII85Decode":
                stripped = re.sub(rb"\s", b"", raw)
                stripped = stripped.removeprefix(b"<~").removesuffix(b"~>")
                raw = base64.a85decode(stripped)
            elif name == "ASCIIHexDecode":
                raw = bytes.fromhex(re.sub(rb"[^0-9A-Fa-f]", b"", raw.split(b">")[0]).decode("ascii"))
            else:
                return None  # unsupported filter: no text from this stream
        except (ValueError, zlib.error):
            return None
    return raw


def _trailer_dicts(data: bytes, objects: dict):
    for m in re.finditer(rb"trailer", data):
        try:
            value, _ = _parse_value(data, m.end())
        except (_ParseError, RecursionError):
            continue
        if isinstance(value, dict):
            yield value
    for value, _ in objects.values():
        if isinstance(value, dict) and value.get("Type") == "XRef":
            yield value


def _walk_pages(objects: dict, node_ref, out: list, seen: set):
    if isinstance(node_ref, _Ref):
        if node_ref in seen:
            return
        seen.add(node_ref)
    node = _resolve(objects, node_ref)
    if not isinstance(node, dict):
        return
    if node.get("Type") == "Page":
        out.append(node)
        return
    kids = _resolve(objects, node.get("Kids"))
    if isinstance(kids, list):
        for kid in kids:
            _walk_pages(objects, kid, out, seen)


def _find_pages(data: bytes, objects: dict) -> list[dict]:
    for trailer in _trailer_dicts(data, objects):
        catalog = _resolve(objects, trailer.get("Root"))
        if not isinstance(catalog, dict):
            continue
        pages: list[dict] = []
        _walk_pages(objects, catalog.get("Pages"), pages, set())
        if pages:
            return pages
    keys = sorted(k for k, (v, _) in objects.items() if isinstance(v, dict) and v.get("Type") == "Page")
    return [objects[k][0] for k in keys]


def _page_content(data: bytes, objects: dict, page: dict) -> bytes:
    contents = page.get("Contents")
    refs = contents if isinstance(contents, list) else [contents]
    chunks = []
    for ref in refs:
        if isinstance(ref, _Ref):
            raw = _stream_data(data, objects, (ref.num, ref.gen))
            if raw:
                chunks.append(raw)
    return b"\n".join(chunks)


# ---------------------------------------------------------------------------
# content-stream text extraction

def _decode_text(raw: bytes) -> str:
    if raw.startswith(b"\xfe\xff"):
        try:
            return raw[2:].decode("utf-16-be")
        except UnicodeDecodeError:
            return raw[2:].decode("latin-1")
    return raw.decode("latin-1")


class _Line(NamedTuple):
    text: str
    size: float
    gap_before: bool


def _page_lines(content: bytes) -> list[_Line]:
    pos, n = 0, len(content)
    stack: list = []
    lines: list[_Line] = []
    buf: list[str] = []
    size = 12.0
    buf_size = size
    leading = 0.0
    pending_gap = False
    cm_y = 0.0          # vertical translation of the graphics transform
    cm_stack: list[float] = []
    text_y = 0.0        # vertical position from Tm/Td/T*
    last_y: float | None = None  # cm_y + text_y of the last placed line
    bt_boundary = False  # no show-text since the last BT
    advanced = False     # last line already stepped down via T* / '

    def show(raw):
        nonlocal buf_size, bt_boundary
        if not isinstance(raw, bytes):
            return
        if not buf:
            buf_size = size
        buf.append(_decode_text(raw))
        bt_boundary = False

    def flush():
        nonlocal buf, pending_gap
        text = "".join(buf).strip()
        if text:
            lines.append(_Line(text, buf_size, pending_gap))
            pending_gap = False
        buf = []

    def implicit_break():
        """T* / ' / ": advance by one leading, never a paragraph gap."""
        nonlocal text_y, last_y, advanced
        flush()
        text_y -= leading or 1.2 * size
        last_y = cm_y + text_y
        advanced = True

    def explicit_move(new_text_y: float):
        """Td/TD/Tm jump: a paragraph gap when it overshoots one line.

        After a T* the baseline is already on the next line, so at a BT
        boundary any real jump is a gap; writers that instead position
        every line with an explicit move get one leading's worth of slack.
        """
        nonlocal text_y, last_y, pending_gap, advanced
        text_y = new_text_y
        new_y = cm_y + text_y
        if last_y is not None and new_y != last_y:
            flush()
            if bt_boundary:
                threshold = 2.0 if advanced else max(2.0, 1.45 * (leading or 1.2 * size))
            else:
                threshold = _GAP_FACTOR * max(size, 1.0)
            if abs(new_y - last_y) > threshold:
                pending_gap = True
        last_y = new_y
        advanced = False

    while pos < n:
        pos = _skip_ws(content, pos)
        if pos >= n:
            break
        c = content[pos : pos + 1]
        try:
            if content.startswith(b"<<", pos):
                value, pos = _parse_dict(content, pos)
                stack.append(value)
                continue
            if c in (b"(", b"<", b"[", b"/"):
                value, pos = _parse_value(content, pos)
                stack.append(value)
                continue
        except _ParseError:
            pos += 1
            continue
        m = _NUM_RE.match(content, pos)
        if m:
            text = m.group(0)
            stack.append(float(text) if b"." in text else int(text))
            pos = m.end()
            continue
        m = _OP_RE.match(content, pos)
        if not m:
            pos += 1
            continue
        op = m.group(0)
        pos = m.end()

        if op == b"Tf" and stack and isinstance(stack[-1], (int, float)):
            size = float(stack[-1])
        elif op == b"TL" and stack and isinstance(stack[-1], (int, float)):
            leading = float(stack[-1])
        elif op in (b"Td", b"TD") and len(stack) >= 2 and isinstance(stack[-1], (int, float)):
            ty = float(stack[-1])
            if op == b"TD":
                leading = -ty
            if ty:
                explicit_move(text_y + ty)
        elif op == b"T*":
            implicit_break()
        elif op == b"Tm" and len(stack) >= 6 and isinstance(stack[-1], (int, float)):
            explicit_move(float(stack[-1]))
        elif op == b"cm" and len(stack) >= 6 and isinstance(stack[-1], (int, float)):
            cm_y += float(stack[-1])
        elif op == b"q":
            cm_stack.append(cm_y)
        elif op == b"Q":
            if cm_stack:
                cm_y = cm_stack.pop()
        elif op == b"BT":
            flush()
            text_y = 0.0
            bt_boundary = True
        elif op == b"ET":
            flush()
        elif op == b"Tj" and stack:
            show(stack[-1])
        elif op in (b"'", b'"'):
            implicit_break()
            if stack:
                show(stack[-1])
        elif op == b"TJ" and stack and isinstance(stack[-1], list):
            for element in stack[-1]:
                if isinstance(element, bytes):
                    show(element)
                elif isinstance(element, (int, float)) and element < -180 and buf:
                    buf.append(" ")
        stack = []

    flush()
    return lines


def _pages_markdown(page_line_lists: list[list[_Line]]) -> str:
    sizes = Counter(round(line.size, 1) for page in page_line_lists for line in page)
    if not sizes:
        return ""
    top_count = max(sizes.values())
    body = min(s for s, c in sizes.items() if c == top_count)
    graded = len(sizes) > 1

    page_texts = []
    for page in page_line_lists:
        paragraphs: list[tuple[float, list[str]]] = []
        for line in page:
            rounded = round(line.size, 1)
            if paragraphs and not line.gap_before and paragraphs[-1][0] == rounded:
                paragraphs[-1][1].append(line.text)
            else:
                paragraphs.append((rounded, [line.text]))
        parts = []
        for rounded, texts in paragraphs:
            joined = " ".join(texts)
            if graded and rounded >= _H1_FACTOR * body:
                parts.append("# " + joined)
            elif graded and rounded >= _H2_FACTOR * body:
                parts.append("## " + joined)
            else:
                parts.append(joined)
        page_texts.append("\n\n".join(parts))

    return "\n\n---\n\n".join(t for t in page_texts if t)


def pdf_to_markdown(data: bytes, filename: str = "") -> Document:
    """Extract markdown text from PDF bytes; deterministic per input."""
    if len(data) > MAX_PDF_BYTES:
        raise TooLargeError(f"{len(data)} bytes exceeds the {MAX_PDF_BYTES} byte cap")
    if b"%PDF-" not in data[:1024]:
        raise NotAPdfError("missing %PDF- header")
    objects = _collect_objects(data)
    if any("Encrypt" in t for t in _trailer_dicts(data, objects)):
        raise EncryptedPdfError("document is encrypted")
    pages = _find_pages(data, objects)
    page_line_lists = []
    for page in pages:
        try:
            page_line_lists.append(_page_lines(_page_content(data, objects, page)))
        except (_ParseError, RecursionError):
            page_line_lists.append([])
    markdown = _pages_markdown(page_line_lists)
    return Document(
        id=hashlib.sha256(data).hexdigest()[:12],
        filename=filename,
        markdown=markdown,
        page_count=len(pages),
        byte_size=len(data),
        uploaded_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        extraction_empty=not markdown,
    )


# ---------------------------------------------------------------------------
# prompt budgeting

def truncate_markdown(text: str, max_chars: int) -> str:
    """Prefix cut at the last paragraph boundary within `max_chars`.

    The whole text passes through unmarked when it fits; otherwise the
    cut falls on a blank-line boundary (possibly yielding an empty
    prefix) and the truncation marker is appended.
    """
    if max_chars < 1:
        raise ValueError("max_chars must be >= 1")
    if len(text) <= max_chars:
        return text
    cut = text.rfind("\n\n", 0, max_chars + 1)
    prefix = text[:cut] if cut > 0 else ""
    return prefix + TRUNCATION_MARKER


def truncate_for_prompt(doc: Document, max_chars: int) -> str:
    return truncate_markdown(doc.markdown, max_chars)


def combine_for_prompt(documents: list[Document], max_chars: int) -> str:
    """Concatenate document markdown, most recently added first."""
    parts = [
        f"## {d.filename or d.id}\n\n{d.markdown}" for d in reversed(documents) if d.markdown
    ]
    if not parts:
        return ""
    return truncate_markdown("\n\n---\n\n".join(parts), max_chars)

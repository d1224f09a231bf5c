"""Information-retrieval tools: protein metadata lookups (live or recorded
fixtures) and a local-corpus literature QA tool with lexical retrieval."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from ..llm import ChatMessage, LLMGateway

AA_LETTERS = set("ACDEFGHIKLMNPQRSTVWYX")

CHUNK_SIZE = 3000
TOP_K = 8
BM25_K1 = 1.5
BM25_B = 0.75


class InfoToolError(Exception):
    pass


@dataclass
class ProteinMetadata:
    accession: str
    names: list[str] = field(default_factory=list)
    function_text: str = ""
    subunit_structure: str = ""
    sequence: str = ""
    sites: list[dict] = field(default_factory=list)  # kind, first, last, note
    kinetics: str = ""

    def __post_init__(self) -> None:
        bad = set(self.sequence.upper()) - AA_LETTERS
        if bad:
            raise InfoToolError(f"sequence contains non-amino-acid letters: {sorted(bad)}")
        for s in self.sites:
            if s.get("kind") not in ("active", "binding"):
                raise InfoToolError(f"bad site kind {s.get('kind')!r}")

    def render(self) -> str:
        lines = [f"Accession: {self.accession}"]
        if self.names:
            lines.append("Names: " + ", ".join(self.names))
        if self.function_text:
            lines.append("Function: " + self.function_text)
        if self.subunit_structure:
            lines.append("Subunit structure: " + self.subunit_structure)
        if self.sequence:
            lines.append(f"Sequence ({len(self.sequence)} aa): {self.sequence}")
        for s in self.sites:
            span = f"{s['first']}" if s["first"] == s["last"] else f"{s['first']}-{s['last']}"
            lines.append(f"Site [{s['kind']}] residues {span}: {s.get('note', '')}")
        if self.kinetics:
            lines.append("Kinetics: " + self.kinetics)
        return "\n".join(lines)


def normalize_query(query: str) -> str:
    return query.strip().upper()


def default_metadata_fixture() -> Path:
    return Path(__file__).resolve().parent.parent / "data" / "fixtures" / "protein_metadata.json"


@dataclass
class MetadataConfig:
    fixture_mode: bool = True
    fixture_path: Path | None = None
    api_base: str = "https://rest.uniprot.org"


def fetch_protein_metadata(query: str, config: MetadataConfig | None = None) -> ProteinMetadata:
    """Resolve a UniProt accession or PDB id to populated metadata."""
    config = config or MetadataConfig()
    q = normalize_query(query)
    if not q:
        raise InfoToolError("empty query: pass a UniProt accession or 4-character PDB id")
    if config.fixture_mode:
        path = config.fixture_path or default_metadata_fixture()
        store = json.loads(path.read_text())
        if q not in store:
            raise InfoToolError(f"no recorded metadata for {q!r}")
        return ProteinMetadata(**store[q])
    return _fetch_live(q, config)


def _fetch_live(q: str, config: MetadataConfig) -> ProteinMetadata:
    import requests

    accession = q
    if len(q) == 4 and q[0].isdigit():
        # PDB id -> accession via the cross-reference search endpoint.
        resp = requests.get(
            f"{config.api_base}/uniprotkb/search",
            params={"query": f"xref:pdb-{q}", "format": "json", "size": 1},
            timeout=60,
        )
        resp.raise_for_status()
        results = resp.json().get("results", [])
        if not results:
            raise InfoToolError(f"no UniProt entry cross-referenced to PDB {q}")
        accession = results[0]["primaryAccession"]
    resp = requests.get(f"{config.api_base}/uniprotkb/{accession}.json", timeout=60)
    if resp.status_code == 404:
        raise InfoToolError(f"unknown accession {accession!r}")
    resp.raise_for_status()
    data = resp.json()
    names = []
    desc = data.get("proteinDescription", {})
    rec = desc.get("recommendedName", {}).get("fullName", {}).get("value")
    if rec:
        names.append(rec)
    for g in data.get("genes", []):
        v = g.get("geneName", {}).get("value")
        if v:
            names.append(v)
    function_text = ""
    subunit = ""
    kinetics = ""
    for c in data.get("comments", []):
        texts = " ".join(t.get("value", "") for t in c.get("texts", []))
        if c.get("commentType") == "FUNCTION":
            function_text = texts
        elif c.get("commentType") == "SUBUNIT":
            subunit = texts
        elif c.get("commentType") == "BIOPHYSICOCHEMICAL PROPERTIES":
            kinetics = texts
    sites = []
    for f in data.get("features", []):
        kind = {"Active site": "active", "Binding site": "binding"}.get(f.get("type"))
        if kind:
            loc = f.get("location", {})
            sites.append(
                {
                    "kind": kind,
                    "first": loc.get("start", {}).get("value", 0),
                    "last": loc.get("end", {}).get("value", 0),
                    "note": f.get("description", ""),
                }
            )
    return ProteinMetadata(
        accession=accession,
        names=names,
        function_text=function_text,
        subunit_structure=subunit,
        sequence=data.get("sequence", {}).get("value", ""),
        sites=sites,
        kinetics=kinetics,
    )


# ---------------------------------------------------------------------------
# Literature QA over a local corpus


@dataclass(frozen=True)
class CorpusChunk:
    doc_id: str
    chunk_index: int
    text: str
    source_path: str


def _extract_text(path: Path) -> str | None:
    if path.suffix.lower() in (".txt", ".md"):
        try:
            return path.read_text(errors="replace")
        except OSError:
            return None
    if path.suffix.lower() == ".pdf":
        # Minimal text scrape: printable runs from the raw stream.  Failures
        # degrade to skipping the file.
        try:
            raw = path.read_bytes()
        except OSError:
            return None
        runs = re.findall(rb"[ -~\n]{8,}", raw)
        text = b"\n".join(runs).decode("ascii", errors="replace")
        return text if len(text) > 100 else None
    return None


def chunk_document(doc_id: str, text: str, source_path: str) -> list[CorpusChunk]:
    """Chunks tile the text exactly: no gaps, no overlap."""
    chunks = []
    for i in range(0, max(len(text), 1), CHUNK_SIZE):
        chunks.append(CorpusChunk(doc_id, i // CHUNK_SIZE, text[i : i + CHUNK_SIZE], source_path))
    return chunks


def load_corpus(corpus_dir: str | Path) -> tuple[list[CorpusChunk], list[str]]:
    """Returns (chunks, warnings for skipped documents)."""
    chunks: list[CorpusChunk] = []
    warnings: list[str] = []
    root = Path(corpus_dir)
    for path in sorted(root.glob("*")):
        if not path.is_file():
            continue
        text = _extract_text(path)
        if text is None:
            warnings.append(f"skipped unextractable document: {path.name}")
            continue
        chunks.extend(chunk_document(path.stem, text, str(path)))
    return chunks, warnings


_TOKEN_RE = re.compile(r"[a-z0-9]+")


def _tokens(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def bm25_rank(question: str, chunks: list[CorpusChunk]) -> list[tuple[float, CorpusChunk]]:
    """Okapi BM25 (k1=1.5, b=0.75) over chunk token bags, descending."""
    docs = [_tokens(c.text) for c in chunks]
    n = len(docs)
    avgdl = sum(len(d) for d in docs) / max(n, 1) or 1.0
    df: dict[str, int] = {}
    for d in docs:
        for t in set(d):
            df[t] = df.get(t, 0) + 1
    scored = []
    q_tokens = _tokens(question)
    for d, c in zip(docs, chunks):
        tf: dict[str, int] = {}
        for t in d:
            tf[t] = tf.get(t, 0) + 1
        score = 0.0
        for t in q_tokens:
            if t not in tf:
                continue
            idf = math.log(1 + (n - df[t] + 0.5) / (df[t] + 0.5))
            denom = tf[t] + BM25_K1 * (1 - BM25_B + BM25_B * len(d) / avgdl)
            score += idf * tf[t] * (BM25_K1 + 1) / denom
        scored.append((score, c))
    scored.sort(key=lambda sc: (-sc[0], sc[1].doc_id, sc[1].chunk_index))
    return scored


LITERATURE_PROMPT = (
    "Answer the question using only the numbered source excerpts. Cite the "
    "sources you rely on by their bracketed numbers.\n\nQuestion: {question}\n\n"
    "Sources:\n{sources}"
)


@dataclass
class LiteratureAnswer:
    answer: str
    citations: list[tuple[str, int]]  # (doc_id, chunk_index)


def literature_search(
    question: str, corpus_dir: str | Path, gateway: LLMGateway
) -> LiteratureAnswer:
    chunks, warnings = load_corpus(corpus_dir)
    if not chunks:
        return LiteratureAnswer(answer="no sources available in the corpus", citations=[])
    ranked = bm25_rank(question, chunks)
    top = [c for score, c in ranked[:TOP_K] if score > 0] or [ranked[0][1]]
    sources = "\n".join(
        f"[{i + 1}] ({c.doc_id}, chunk {c.chunk_index}) {c.text[:1500]}"
        for i, c in enumerate(top)
    )
    answer = gateway.complete_chat(
        [
            ChatMessage("system", "You answer scientific questions from provided excerpts with citations."),
            ChatMessage("user", LITERATURE_PROMPT.format(question=question, sources=sources)),
        ]
    )
    if warnings:
        answer += "\n" + "\n".join(f"[warning] {w}" for w in warnings)
    return LiteratureAnswer(answer=answer, citations=[(c.doc_id, c.chunk_index) for c in top])

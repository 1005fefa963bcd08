"""Tweet normalization, annotated corpora, and the synthetic corpus generator.

Every normalization rule blanks characters of the original text instead of
deleting them, so each surviving token keeps its character offsets. Those
offsets are what turn character-span annotations into token masks.
"""
from __future__ import annotations

import json
import logging
import random
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import CorpusFormatError

logger = logging.getLogger(__name__)

SLOT = "{LOC}"

_URL_RE = re.compile(r"(?:\b[a-z][a-z0-9+.\-]*://|\bwww\.)\S+", re.IGNORECASE)
_MENTION_RE = re.compile(r"(?<![\w@])@\w+")
_EMOTICON_RE = re.compile(
    r"(?<!\S)(?:[:;=][\-o'^]?[)(\]\[dDpPoO3/\\|*$@]+|</?3+|\^_*\^|-_+-|[)(][\-']?[:;=])(?=\s|$|[.,!?])"
)
_RETWEET_RE = re.compile(r"^\s*rt(?=\s|:|$)", re.IGNORECASE)
_APOSTROPHES = {"'", "’", "ʼ"}
# variation selectors and the combining keycap only ever decorate emoji
_EMOJI_MARKS = {chr(c) for c in range(0xFE00, 0xFE10)} | {"⃣"}


@dataclass(frozen=True)
class RawRecord:
    text: str

    def __post_init__(self):
        if not isinstance(self.text, str) or not self.text.strip():
            raise CorpusFormatError("raw record text is empty")


@dataclass(frozen=True)
class AnnotatedTweet:
    """A token sequence with its aligned 0/1 location mask."""

    tokens: tuple[str, ...]
    mask: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "mask", tuple(int(v) for v in self.mask))
        if len(self.tokens) != len(self.mask):
            raise CorpusFormatError(
                f"{len(self.tokens)} tokens but {len(self.mask)} mask labels"
            )
        if not self.tokens:
            raise CorpusFormatError("annotated tweet has no tokens")
        if any(v not in (0, 1) for v in self.mask):
            raise CorpusFormatError(f"mask values must be 0 or 1, got {list(self.mask)}")
        for tok in self.tokens:
            _check_token(tok)

    def __len__(self):
        return len(self.tokens)

    @property
    def location_tokens(self) -> list[str]:
        return [t for t, v in zip(self.tokens, self.mask) if v]


def _check_token(tok):
    if not isinstance(tok, str) or not tok or any(ch.isspace() for ch in tok):
        raise CorpusFormatError(f"invalid token {tok!r}")
    if tok != tok.lower():
        raise CorpusFormatError(f"token {tok!r} is not lowercase")
    if tok[0] in "#@" or _URL_RE.search(tok):
        raise CorpusFormatError(f"token {tok!r} was not normalized")


@dataclass(frozen=True)
class Corpus:
    examples: tuple[AnnotatedTweet, ...]
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "examples", tuple(self.examples))
        seen = set()
        for ex in self.examples:
            if ex.tokens in seen:
                raise CorpusFormatError(f"duplicate token sequence {' '.join(ex.tokens)!r}")
            seen.add(ex.tokens)

    def __len__(self):
        return len(self.examples)

    def __iter__(self):
        return iter(self.examples)

    def __getitem__(self, i):
        return self.examples[i]

    def subset(self, indices: Iterable[int], provenance: str | None = None) -> "Corpus":
        return Corpus(
            tuple(self.examples[i] for i in indices),
            self.provenance if provenance is None else provenance,
        )

    @classmethod
    def deduplicated(cls, examples: Iterable[AnnotatedTweet], provenance: str = "") -> "Corpus":
        return cls(dedup(examples), provenance)


@dataclass(frozen=True)
class Gazetteer:
    entries: tuple[tuple[str, ...], ...] = field(default_factory=tuple)

    def __post_init__(self):
        cleaned = []
        seen = set()
        for entry in self.entries:
            entry = tuple(entry)
            if not 1 <= len(entry) <= 4:
                raise CorpusFormatError(f"gazetteer entry {entry!r} must have 1-4 tokens")
            if any(not t or t != t.lower() or any(c.isspace() for c in t) for t in entry):
                raise CorpusFormatError(f"gazetteer entry {entry!r} has an invalid token")
            if entry not in seen:
                seen.add(entry)
                cleaned.append(entry)
        object.__setattr__(self, "entries", tuple(cleaned))

    def __len__(self):
        return len(self.entries)


def dedup(examples: Iterable[AnnotatedTweet]) -> list[AnnotatedTweet]:
    """Drop examples whose token sequence was already seen; first one wins."""
    seen = set()
    out = []
    for ex in examples:
        if ex.tokens not in seen:
            seen.add(ex.tokens)
            out.append(ex)
    return out


# -- normalization ---------------------------------------------------------


def _keeps(ch: str) -> bool:
    if ord(ch) > 0xFFFF or ch in _EMOJI_MARKS:
        return False
    return unicodedata.category(ch)[0] in "LNM"


def tokenize_with_offsets(text: str) -> list[tuple[str, int, int]]:
    """Normalize `text` and return ``(token, start, end)`` triples.

    ``start``/``end`` index the original string. Rules, in order: URLs,
    @-mentions and ASCII emoticons are blanked; every remaining character
    that is not a letter, digit or combining mark is blanked (this removes
    hashtag signs, punctuation and emoji) except apostrophes sitting between
    two kept characters; surviving characters are lowercased and the result
    is split on the blanks.
    """
    work = list(text)
    for pattern in (_URL_RE, _MENTION_RE, _EMOTICON_RE):
        for match in pattern.finditer("".join(work)):
            work[match.start():match.end()] = " " * (match.end() - match.start())

    kept = [_keeps(ch) for ch in work]
    for i, ch in enumerate(work):
        if ch in _APOSTROPHES and 0 < i < len(work) - 1 and kept[i - 1] and kept[i + 1]:
            work[i] = "'"
            kept[i] = True

    tokens = []
    start = None
    for i in range(len(work) + 1):
        if i < len(work) and kept[i]:
            if start is None:
                start = i
            continue
        if start is not None:
            tok = "".join(c if c == "'" else c.lower() for c in work[start:i])
            tokens.append((tok, start, i))
            start = None
    return tokens


def preprocess(raw: RawRecord | str) -> list[str]:
    """Lowercase token list with URLs, mentions, emoticons and punctuation removed.

    Stopwords stay. An empty list means nothing survived and the record
    should be discarded by the caller.
    """
    text = raw.text if isinstance(raw, RawRecord) else RawRecord(raw).text
    return [tok for tok, _, _ in tokenize_with_offsets(text)]


def is_retweet_duplicate(raw: RawRecord | str) -> bool:
    text = raw.text if isinstance(raw, RawRecord) else raw
    return bool(_RETWEET_RE.match(text))


def annotate_spans(text: str, spans: Sequence[Sequence[int]]) -> AnnotatedTweet | None:
    """Convert character-span annotations on raw text into a token mask.

    A token is labeled 1 only if it lies entirely inside one span.
    Returns None when no token survives normalization.
    """
    spans = [(int(a), int(b)) for a, b in spans]
    for a, b in spans:
        if not 0 <= a <= b <= len(text):
            raise CorpusFormatError(f"span ({a}, {b}) outside text of length {len(text)}")
    triples = tokenize_with_offsets(text)
    if not triples:
        return None
    mask = [int(any(a <= s and e <= b for a, b in spans)) for _, s, e in triples]
    return AnnotatedTweet(tuple(t for t, _, _ in triples), tuple(mask))


# -- file formats ----------------------------------------------------------


def _parse_record(obj, lineno: int, drop_retweets: bool) -> AnnotatedTweet | None:
    if not isinstance(obj, dict):
        raise CorpusFormatError(f"line {lineno}: record must be a JSON object")
    try:
        if "tokens" in obj:
            tokens, mask = obj["tokens"], obj.get("mask")
            if not isinstance(tokens, list) or not isinstance(mask, list):
                raise CorpusFormatError("'tokens' and 'mask' must both be lists")
            if any(isinstance(v, bool) or not isinstance(v, int) for v in mask):
                raise CorpusFormatError("mask entries must be integers 0/1")
            return AnnotatedTweet(tuple(tokens), tuple(mask))
        if "text" in obj:
            text = obj["text"]
            if not isinstance(text, str) or not text.strip():
                raise CorpusFormatError("'text' must be a non-empty string")
            if drop_retweets and is_retweet_duplicate(text):
                return None
            return annotate_spans(text, obj.get("spans", []))
    except CorpusFormatError as exc:
        raise CorpusFormatError(f"line {lineno}: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise CorpusFormatError(f"line {lineno}: malformed record ({exc})") from None
    raise CorpusFormatError(f"line {lineno}: record needs 'tokens'+'mask' or 'text'+'spans'")


def load_corpus(path: str | Path, drop_retweets: bool = True) -> Corpus:
    """Read a JSONL corpus.

    Token+mask records are validated as-is; text+spans records are
    normalized and converted to masks (retweets are skipped unless
    ``drop_retweets`` is false). Duplicate token sequences keep the first
    occurrence.
    """
    path = Path(path)
    examples = []
    skipped = 0
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"line {lineno}: invalid JSON ({exc.msg})") from None
            ex = _parse_record(obj, lineno, drop_retweets)
            if ex is None:
                skipped += 1
            else:
                examples.append(ex)
    if skipped:
        logger.info("%s: skipped %d empty or retweet records", path, skipped)
    return Corpus.deduplicated(examples, provenance=str(path))


def dump_corpus(corpus: Corpus) -> str:
    lines = [
        json.dumps({"tokens": list(ex.tokens), "mask": list(ex.mask)}, ensure_ascii=False)
        for ex in corpus
    ]
    return "".join(line + "\n" for line in lines)


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    Path(path).write_text(dump_corpus(corpus), encoding="utf-8")


def load_gazetteer(path: str | Path) -> Gazetteer:
    entries = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        toks = line.lower().split()
        if toks:
            entries.append(tuple(toks))
    return Gazetteer(tuple(entries))


def load_templates(path: str | Path) -> list[str]:
    return [line.strip() for line in Path(path).read_text(encoding="utf-8").splitlines() if line.strip()]


# -- synthetic corpora -----------------------------------------------------


def _template_tokens(template: str) -> list[str]:
    toks = template.split()
    for tok in toks:
        if SLOT in tok and tok != SLOT:
            raise CorpusFormatError(f"slot must be a whitespace-separated token in {template!r}")
    return [t if t == SLOT else t.lower() for t in toks]


def instantiate(template_tokens: Sequence[str], entries: Sequence[Sequence[str]]) -> AnnotatedTweet:
    """Fill the slots of a tokenized template, in order, with `entries`."""
    tokens, mask = [], []
    fill = iter(entries)
    for tok in template_tokens:
        if tok == SLOT:
            entry = next(fill)
            tokens.extend(entry)
            mask.extend([1] * len(entry))
        else:
            tokens.append(tok)
            mask.append(0)
    return AnnotatedTweet(tuple(tokens), tuple(mask))


def synth_generate(
    gazetteer: Gazetteer,
    templates: Sequence[str],
    n: int,
    seed: int,
    max_attempts: int | None = None,
    fillers: Sequence[str] = (),
    max_prefix: int = 0,
    max_suffix: int = 0,
) -> Corpus:
    """Sample `n` distinct annotated tweets from templates and gazetteer entries.

    Entries within one tweet are drawn without replacement. With `fillers`,
    up to `max_prefix` / `max_suffix` random filler words (label 0) are put
    before / after each tweet, which shifts where locations sit. Raises
    CorpusFormatError if the template space cannot supply `n` distinct
    token sequences within ``max_attempts`` draws.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not templates:
        raise CorpusFormatError("no templates given")
    parsed = [_template_tokens(t) for t in templates]
    slots = [toks.count(SLOT) for toks in parsed]
    if max(slots) > 0 and len(gazetteer) == 0:
        raise CorpusFormatError("templates contain {LOC} slots but the gazetteer is empty")
    if max(slots) > len(gazetteer) and len(gazetteer) > 0:
        raise CorpusFormatError(f"a template has {max(slots)} slots but only {len(gazetteer)} entries")

    rng = random.Random(seed)
    max_attempts = max_attempts or 50 * n + 1000
    seen = set()
    examples = []
    for _ in range(max_attempts):
        if len(examples) == n:
            break
        k = rng.randrange(len(parsed))
        entries = rng.sample(gazetteer.entries, slots[k]) if slots[k] else []
        ex = instantiate(parsed[k], entries)
        if fillers and (max_prefix or max_suffix):
            pre = [rng.choice(fillers) for _ in range(rng.randint(0, max_prefix))]
            post = [rng.choice(fillers) for _ in range(rng.randint(0, max_suffix))]
            ex = AnnotatedTweet(
                (*pre, *ex.tokens, *post),
                (0,) * len(pre) + ex.mask + (0,) * len(post),
            )
        if ex.tokens in seen:
            continue
        seen.add(ex.tokens)
        examples.append(ex)
    if len(examples) < n:
        raise CorpusFormatError(
            f"only {len(examples)} distinct tweets after {max_attempts} draws; "
            "add templates or gazetteer entries"
        )
    return Corpus(tuple(examples), provenance=f"synthetic seed={seed} n={n}")

"""URL-to-registrable-domain normalization.

The domain-bias dataset is keyed by bare registrable domains
(example.com, bbc.co.uk), so page URLs must be reduced to exactly that
form before lookup.  Suffix handling follows the public-suffix rule
semantics (exact rules, ``*.`` wildcards, ``!`` exceptions; longest match
wins) over a rule set shipped as a data file.
"""

from __future__ import annotations

import ipaddress
from importlib import resources
from typing import Optional
from urllib.parse import urlsplit

from .errors import DataError

_DEFAULT_RULES = None


class SuffixRules:
    def __init__(self, lines):
        self.exact = set()
        self.wildcard = set()      # "foo" stands for "*.foo"
        self.exception = set()     # "bar.foo" stands for "!bar.foo"
        for raw in lines:
            line = raw.strip()
            if not line or line.startswith("//"):
                continue
            if line.startswith("!"):
                self.exception.add(line[1:])
            elif line.startswith("*."):
                self.wildcard.add(line[2:])
            else:
                self.exact.add(line)

    def public_suffix(self, host: str) -> str:
        """Longest matching suffix of ``host``; unlisted TLDs match as a
        single label."""
        labels = host.split(".")
        best = labels[-1]  # implicit "*" rule
        for start in range(len(labels) - 1, -1, -1):
            candidate = ".".join(labels[start:])
            if candidate in self.exception:
                return ".".join(labels[start + 1:])
            if candidate in self.exact and candidate.count(".") >= best.count("."):
                best = candidate
            if start > 0 and ".".join(labels[start:]) in self.wildcard:
                wider = ".".join(labels[start - 1:])
                if wider.count(".") >= best.count("."):
                    best = wider
        return best


def load_suffix_rules(source=None) -> SuffixRules:
    """Load suffix rules from ``source``, or the bundled data file."""
    if source is None:
        text = resources.files("proxyaudit.data").joinpath(
            "public_suffix_list.dat").read_text(encoding="utf-8")
        return SuffixRules(text.splitlines())
    try:
        with open(source, encoding="utf-8") as fh:
            return SuffixRules(fh)
    except OSError as exc:
        raise DataError("cannot read suffix rules %s: %s" % (source, exc)) from exc


def _default_rules() -> SuffixRules:
    global _DEFAULT_RULES
    if _DEFAULT_RULES is None:
        _DEFAULT_RULES = load_suffix_rules()
    return _DEFAULT_RULES


def registrable_domain(host: str, rules: Optional[SuffixRules] = None) -> Optional[str]:
    """Public suffix plus one label, or None when ``host`` has none
    (it is itself a suffix, an IP address, or not a dotted name)."""
    rules = rules or _default_rules()
    host = host.strip().strip(".").lower()
    if not host or "." not in host:
        return None
    try:
        ipaddress.ip_address(host)
        return None
    except ValueError:
        pass
    labels = host.split(".")
    if any(not label for label in labels):
        return None
    suffix = rules.public_suffix(host)
    suffix_len = suffix.count(".") + 1 if suffix else 0
    if len(labels) <= suffix_len:
        return None
    return ".".join(labels[len(labels) - suffix_len - 1:])


def normalize_url_domain(url: str, rules: Optional[SuffixRules] = None) -> Optional[str]:
    """Reduce a URL to its registrable domain; None for malformed input.

    Handles scheme-less inputs ("WWW.Example.com/path") by treating the
    leading component as the host.
    """
    if not isinstance(url, str):
        return None
    candidate = url.strip()
    if not candidate:
        return None
    if "//" not in candidate.split("?", 1)[0].split("#", 1)[0]:
        candidate = "//" + candidate
    try:
        host = urlsplit(candidate).hostname
    except ValueError:
        return None
    if not host:
        return None
    return registrable_domain(host, rules)

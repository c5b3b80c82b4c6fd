"""
Strip LaTeX markup from citation text

Text without any backslash is treated as plain text and only has its
whitespace normalized. Anything else is scanned as LaTeX: comments are
removed, layout commands are dropped together with their arguments,
formatting commands are dropped but keep their argument text, accents
and symbols such as \\alpha become Unicode and grouping braces
disappear. Math that renders to nothing is dropped with its dollar
signs.

The output of the LaTeX path never contains a backslash, which makes
the filter idempotent.
"""

import re
import string
import unicodedata

# Layout commands whose argument is meaningless for bibliographic text
DROP_WITH_ARGUMENT = {
    'vspace', 'hspace', 'vskip', 'hskip', 'label', 'phantom', 'hphantom',
    'vphantom', 'rule', 'kern'
}

DROP_WITHOUT_ARGUMENT = {
    'newline', 'noindent', 'linebreak', 'pagebreak', 'newpage', 'clearpage',
    'par', 'smallskip', 'medskip', 'bigskip', 'centering', 'raggedright',
    'hfill', 'vfill', 'quad', 'qquad', 'indent', 'break', 'nobreak',
    'allowbreak', 'enspace'
}

ZERO_WIDTH = {'protect', 'relax', 'nocorr', 'xspace', 'unskip'}

LETTERS = {
    'ss': 'ß', 'o': 'ø', 'O': 'Ø', 'ae': 'æ', 'AE': 'Æ', 'oe': 'œ', 'OE': 'Œ',
    'aa': 'å', 'AA': 'Å', 'l': 'ł', 'L': 'Ł', 'i': 'i', 'j': 'j',
    'dh': 'ð', 'DH': 'Ð', 'th': 'þ', 'TH': 'Þ', 'ng': 'ŋ', 'NG': 'Ŋ',
    'textendash': '–', 'textemdash': '—', 'textquoteright': '’',
    'textquoteleft': '‘', 'ldots': '...', 'dots': '...', 'textellipsis': '...',
    'textasciitilde': '~', 'textunderscore': '_', 'textbackslash': ' ',
    'LaTeX': 'LaTeX', 'TeX': 'TeX', 'BibTeX': 'BibTeX'
}

GREEK = dict(zip(
    'alpha beta gamma delta epsilon zeta eta theta iota kappa lambda mu nu xi '
    'pi rho sigma tau upsilon phi chi psi omega'.split(),
    'αβγδεζηθικλμνξπρστυφχψω'
))
GREEK.update({name.capitalize(): GREEK[name].upper() for name in (
    'gamma', 'delta', 'theta', 'lambda', 'xi', 'pi', 'sigma', 'upsilon', 'phi', 'psi', 'omega'
)})
GREEK.update({
    'varepsilon': 'ε', 'vartheta': 'ϑ', 'varpi': 'ϖ', 'varrho': 'ϱ',
    'varsigma': 'ς', 'varphi': 'φ'
})

MATH_SYMBOLS = {
    'times': '×', 'cdot': '·', 'pm': '±', 'mp': '∓', 'div': '÷',
    'leq': '≤', 'le': '≤', 'geq': '≥', 'ge': '≥', 'neq': '≠', 'ne': '≠',
    'approx': '≈', 'sim': '∼', 'equiv': '≡', 'propto': '∝', 'infty': '∞',
    'partial': '∂', 'nabla': '∇', 'sum': '∑', 'prod': '∏', 'int': '∫',
    'to': '→', 'rightarrow': '→', 'leftarrow': '←',
    'leftrightarrow': '↔', 'Rightarrow': '⇒', 'in': '∈', 'notin': '∉',
    'subset': '⊂', 'subseteq': '⊆', 'cup': '∪', 'cap': '∩', 'emptyset': '∅',
    'forall': '∀', 'exists': '∃', 'neg': '¬', 'wedge': '∧', 'vee': '∨',
    'ell': 'ℓ', 'hbar': 'ℏ', 'circ': '∘', 'degree': '°', 'prime': '′'
}
MATH_SYMBOLS.update({name: name for name in (
    'log', 'ln', 'exp', 'sin', 'cos', 'tan', 'max', 'min', 'arg', 'lim', 'det'
)})

ACCENT_SYMBOLS = {
    "'": "\u0301", "`": "\u0300", "^": "\u0302", "\"": "\u0308",
    "~": "\u0303", "=": "\u0304", ".": "\u0307"
}

ACCENT_COMMANDS = {
    "c": "\u0327", "u": "\u0306", "v": "\u030c", "H": "\u030b",
    "k": "\u0328", "r": "\u030a", "d": "\u0323", "b": "\u0331",
    "t": "\u0361"
}

LITERAL_SYMBOLS = set('%&_#${}')

SPACING_SYMBOLS = set(',;:!> ')

DIMENSION = re.compile(
    r'\s*[-+]?(?:\d+\.?\d*|\.\d+)\s*(?:pt|mm|cm|in|em|ex|bp|pc|sp|dd|cc|mu)'
    r'(?:\s*(?:plus|minus)\s*[-+]?(?:\d+\.?\d*|\.\d+)\s*(?:pt|mm|cm|in|em|ex|fil+))*'
)

WHITESPACE = re.compile(r'\s+')

MAX_DEPTH = 100


def filter_latex(text: str) -> str:
    """
    Remove LaTeX formatting from a citation string

    Parameters
    ----------
    text : str
        raw citation text, possibly LaTeX source.

    Returns
    -------
    str
        cleaned text with collapsed whitespace.

    """
    if not text:
        return ""

    if '\\' not in text:
        return _collapse(text)

    scanner = _LatexScanner(_strip_comments(text))
    rendered = scanner.render(0, len(scanner.text), math=False, depth=0)

    return unicodedata.normalize('NFC', _collapse(rendered))


def _collapse(text: str) -> str:
    return WHITESPACE.sub(' ', text).strip()


def _strip_comments(text: str) -> str:
    lines = []
    for line in text.split('\n'):
        i = 0
        while True:
            i = line.find('%', i)
            if i < 0:
                break
            # an odd run of backslashes escapes the percent sign
            run = 0
            while i - run - 1 >= 0 and line[i - run - 1] == '\\':
                run += 1
            if run % 2 == 0:
                line = line[:i]
                break
            i += 1
        lines.append(line)
    return '\n'.join(lines)


def _match_braces(text: str) -> dict:
    pairs = {}
    stack = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == '\\':
            i += 2
            continue
        if ch == '{':
            stack.append(i)
        elif ch == '}' and stack:
            pairs[stack.pop()] = i
        i += 1
    return pairs


class _LatexScanner:

    def __init__(self, text: str):
        self.text = text
        self.pairs = _match_braces(text)
        self.closers = set(self.pairs.values())

    def render(self, start: int, end: int, math: bool, depth: int) -> str:
        text = self.text
        out = []
        opened = None
        i = start
        while i < end:
            ch = text[i]
            if ch == '\\':
                piece, i = self._command(i, end, math, depth)
                out.append(piece)
                continue
            if ch == '$':
                if not math:
                    opened = len(out)
                    out.append(ch)
                elif opened is not None and not ''.join(out[opened + 1:]).strip():
                    # math that rendered to nothing leaves no empty $$ behind
                    del out[opened:]
                else:
                    out.append(ch)
                math = not math
            elif ch == '{' and i in self.pairs:
                if math:
                    out.append(ch)
            elif ch == '}' and i in self.closers:
                if math:
                    out.append(ch)
            elif ch == '~' and not math:
                out.append(' ')
            else:
                out.append(ch)
            i += 1
        return ''.join(out)

    def _argument(self, i: int, end: int):
        """Locate a balanced {...} argument starting at or after i"""
        j = i
        while j < end and self.text[j] in ' \t\n':
            j += 1
        if j < end and self.text[j] == '{' and j in self.pairs and self.pairs[j] < end:
            return j + 1, self.pairs[j], self.pairs[j] + 1
        return None

    def _skip_optional(self, i: int, end: int) -> int:
        j = i
        while j < end and self.text[j] in ' \t':
            j += 1
        if j < end and self.text[j] == '[':
            close = self.text.find(']', j, end)
            if close >= 0:
                return close + 1
        return i

    def _inner(self, arg, math: bool, depth: int) -> str:
        start, stop, _ = arg
        if depth >= MAX_DEPTH:
            return self.text[start:stop].replace('\\', ' ')
        return self.render(start, stop, math, depth + 1)

    def _accent(self, mark: str, i: int, end: int, math: bool, depth: int):
        arg = self._argument(i, end)
        if arg is not None:
            base = self._inner(arg, math, depth)
            nxt = arg[2]
        else:
            j = i
            while j < end and self.text[j] == ' ':
                j += 1
            if j < end and self.text[j] == '\\':
                base, nxt = self._command(j, end, math, depth + 1)
            elif j < end:
                base, nxt = self.text[j], j + 1
            else:
                return '', end
        if not base:
            return '', nxt
        return base[0] + mark + base[1:], nxt

    def _command(self, i: int, end: int, math: bool, depth: int):
        text = self.text
        j = i + 1
        if j >= end:
            return '', end
        if depth > MAX_DEPTH:
            return '', j + 1

        c = text[j]
        if c not in string.ascii_letters:
            if c == '\\':
                return ' ', self._skip_optional(j + 1, end)
            if c in ACCENT_SYMBOLS:
                return self._accent(ACCENT_SYMBOLS[c], j + 1, end, math, depth)
            if c in LITERAL_SYMBOLS:
                return c, j + 1
            if c in SPACING_SYMBOLS:
                return ' ', j + 1
            if c in '@/-':
                return '', j + 1
            return c, j + 1

        k = j
        while k < end and text[k] in string.ascii_letters:
            k += 1
        name = text[j:k]
        if k < end and text[k] == '*':
            k += 1

        if name in DROP_WITH_ARGUMENT:
            k = self._skip_optional(k, end)
            arg = self._argument(k, end)
            if arg is not None:
                return ' ', arg[2]
            dimension = DIMENSION.match(text, k, end)
            if dimension:
                return ' ', dimension.end()
            return ' ', k

        if name in DROP_WITHOUT_ARGUMENT:
            return ' ', self._skip_optional(k, end)

        if name in ZERO_WIDTH:
            return '', k

        if name in ACCENT_COMMANDS:
            return self._accent(ACCENT_COMMANDS[name], k, end, math, depth)

        symbol = LETTERS.get(name) or GREEK.get(name) or (MATH_SYMBOLS.get(name) if math else None)
        if symbol is not None:
            # \ss{} style empty group
            if k + 1 < end and text[k] == '{' and text[k + 1] == '}':
                k += 2
            return symbol, k

        # Formatting and unknown commands: the token goes, the argument stays
        arg = self._argument(k, end)
        if arg is not None:
            return self._inner(arg, math, depth), arg[2]
        return '', k

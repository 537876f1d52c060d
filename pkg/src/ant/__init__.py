"""ANT-OOlong: a small object language with weak and strong fields, and a
static analysis deciding when one method call may be anticipated over another."""
from importlib import resources
from pathlib import Path

__version__ = "0.1.0"

CORPUS = ("account", "counter", "register", "auction")


def corpus_path(name: str) -> Path:
    """Path of a bundled corpus file; a bare name means the ``.ant`` program."""
    fname = name if Path(name).suffix in (".ant", ".json") else name + ".ant"
    path = Path(str(resources.files(__package__).joinpath("corpus", fname)))
    if not path.is_file():
        raise FileNotFoundError(f"no corpus file named {name!r}")
    return path


def load_corpus(name: str):
    from .parser import parse_program

    return parse_program(corpus_path(name).read_text())

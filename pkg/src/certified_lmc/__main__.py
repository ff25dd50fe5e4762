"""Entry point for `python -m certified_lmc`."""

from certified_lmc.cli.__main__ import run


if __name__ == "__main__":
    run()

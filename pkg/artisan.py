#!/usr/bin/env python3

import sys

from app.console.commands import cli_main

if __name__ == "__main__":
    sys.exit(cli_main(sys.argv[1:]))

"""The __main__ module lets you run the shortlaw CLI interface by typing
`python -m shortlaw`.
"""


import sys
from .ui import main

if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))

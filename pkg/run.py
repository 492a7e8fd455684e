import sys

from pikieval import main

sys.exit(main(sys.argv[1:]))

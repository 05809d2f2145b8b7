import sys

from csslearn.main import main

sys.exit(main())

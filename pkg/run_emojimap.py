import sys
import os

# 便于直接运行
sys.path.append(os.path.dirname(__file__))
from emojimap.cli import main  # noqa: E402


if __name__ == "__main__":
    sys.exit(main())

"""No-op inpainter stub: copies the input image to the output path.

Usage: python -m vqaedit.stub_inpaint IMAGE MASK OUT

Lets the full pipeline run end to end without any learned removal model.
"""

import shutil
import sys


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 3:
        print("usage: python -m vqaedit.stub_inpaint IMAGE MASK OUT", file=sys.stderr)
        return 2
    image, _mask, out = argv
    shutil.copyfile(image, out)
    return 0


if __name__ == "__main__":
    sys.exit(main())

import os
import sys
import logging
from dotenv import load_dotenv

from schwinger_kernels.cli import main

# Load environment variables from .env file
load_dotenv()

# Configure logging; records go to stderr so JSON on stdout stays clean
logging.basicConfig(level=os.getenv('SCHWINGER_LOG_LEVEL', 'INFO').upper(),
                    format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))

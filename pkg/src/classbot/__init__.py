"""classbot: build, train, inspect, and chat with a curriculum-grounded
question-answering bot.

The runtime path of a chat turn is keyword policy filter -> intent
recognition -> question answering over the recognized intent's context;
datasets are built up front from labeled questions and expanded by
backtranslation augmentation.
"""

__version__ = "0.1.0"

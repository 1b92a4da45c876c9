"""Fixed stopword list used by the tokenizer.

Exactly 120 common English words. The list is part of the retrieval
contract: changing it changes every ranking, so it is frozen here and
mirrored verbatim by the reference scorer in the test suite.
"""

STOPWORDS = frozenset("""
a about above after again against all am an and any are as at be because
been before being below between both but by can could did do does doing
down during each few for from further had has have having he her here hers
him his how if in into is it its itself just me more most my myself no nor
not now of off on once only or other our ours out over own same she should
so some such than that the their theirs them then there these they this
those through to too under until up very was we were what when where which
while who whom why will with would you your yours yourself
""".split())

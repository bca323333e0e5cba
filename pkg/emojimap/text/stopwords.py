# 内置英文停用词表。否定词 (not, no, nor, never, n't 系列) 故意不在表内，
# 情感打分需要看到它们。
ENGLISH_STOPWORDS = frozenset(
    """
    a about above after again against all am an and any are as at be because been
    before being below between both but by can could did do does doing down during
    each few for from further had has have having he he'd he'll he's her here here's
    hers herself him himself his how how's i i'd i'll i'm i've if in into is it it's
    its itself just let's me more most my myself now of off on once only or other
    ought our ours ourselves out over own same she she'd she'll she's should so some
    such than that that's the their theirs them themselves then there there's these
    they they'd they'll they're they've this those through to too under until up very
    was we we'd we'll we're we've were what what's when when's where where's which
    while who who's whom why why's will with would you you'd you'll you're you've your
    yours yourself yourselves s t d ll m o re ve y rt via amp
    """.split()
)

"""Turn raw tweets into the token sequences the tagger sees.

Walks through the cleanup rules on a few noisy tweets, then shows how
character-span annotations on raw text become a per-token 0/1 mask.
"""
from geotag.corpus import annotate_spans, is_retweet_duplicate, preprocess, tokenize_with_offsets

tweets = [
    "Hey @AppleSupport my friend @carloxito lost everything in #Mexico #earthquake, "
    "incl his iMac. Can you help him fix? http://bit.ly/2yA8HHI",
    "RT @user Quake in   #Tokyo!! 😱 see https://t.co/x",
    "Building didn't collapse in São Paulo :) stay safe",
]

for text in tweets:
    print(text)
    print("  retweet:", is_retweet_duplicate(text))
    print("  tokens: ", preprocess(text))

# Each surviving token remembers where it came from in the original string,
# which is what lets span annotations be mapped onto tokens.
text = "Strong shaking felt in New York City this morning"
print()
for tok, start, end in tokenize_with_offsets(text):
    print(f"  {tok:10s} [{start:2d}, {end:2d})")

start = text.index("New York City")
tweet = annotate_spans(text, [(start, start + len("New York City"))])
print("\nannotated:", list(zip(tweet.tokens, tweet.mask)))

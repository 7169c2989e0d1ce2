# Semigroup families, expressions and flow integration

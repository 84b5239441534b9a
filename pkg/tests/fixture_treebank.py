"""Shared 12-sentence dependency fixture with its expected constructions.

Each sentence exercises one extraction rule: overt- and null-subject
conjunct participles, the linearized shared subject, coordinated
participles under a conjunction, SV and VS dative absolutes, the
nominalized-participle exclusion, the impersonal byti absolute, the
empty-node (non-canonical) absolute, a plain jegda-clause, the
ATR-relative exclusion, and two coordinated jegda-clauses.
"""

FIXTURE = """\
# sent_id = s01
1\tprisedu\tprijti\tV\tmood=ptcp|aspect=pfv\t3\txadv\t2:xsub\t_\t_
2\tisu\tisusu\tN\tcase=n\t3\tsub\t_\t_\t_
3\tvide\tvideti\tV\taspect=pfv\t0\tpred\t_\t_\t_

# sent_id = s02
1\tprisedu\tprijti\tV\tmood=ptcp|aspect=pfv\t2\txadv\t2:xsub\t_\t_
2\tvide\tvideti\tV\taspect=pfv\t0\tpred\t_\t_\t_

# sent_id = s03
1\ti\ti\tPT\t_\t6\taux\t_\t_\t_
2\tprisedu\tprijti\tV\tmood=ptcp|aspect=pfv\t6\txadv\t3:xsub\t_\t_
3\tisu\tisusu\tN\tcase=n\t6\tsub\t_\t_\t_
4\tvu\tvu\tR\t_\t2\tobl\t_\t_\t_
5\tdomu\tdomu\tN\tcase=a\t4\tobl\t_\t_\t_
6\tvide\tvideti\tV\taspect=pfv\t0\tpred\t_\t_\t_

# sent_id = s04
1\tvostavu\tvostati\tV\tmood=ptcp|aspect=pfv\t2\txadv\t5:xsub\t_\t_
2\ti\ti\tC\t_\t5\txadv\t_\t_\t_
3\tvzem\tvzjati\tV\tmood=ptcp|aspect=pfv\t2\txadv\t5:xsub\t_\t_
4\tmecu\tmecu\tN\tcase=a\t3\tobj\t_\t_\t_
5\tiskoci\tiskociti\tV\taspect=pfv\t0\tpred\t_\t_\t_

# sent_id = s05
1\tjaroslavu\tjaroslavu\tN\tcase=d\t2\tsub\t_\t_\t_
2\tsustju\tbyti\tV\tmood=ptcp|aspect=ipfv|case=d\t4\tadv\t_\t_\t_
3\tnovegorode\tnovugorodu\tN\tcase=l\t2\tobl\t_\t_\t_
4\tsede\tsesti\tV\taspect=pfv\t0\tpred\t_\t_\t_

# sent_id = s06
1\tprisedusju\tprijti\tV\tmood=ptcp|aspect=pfv|case=d\t4\tadv\t_\t_\t_
2\tze\tze\tPT\t_\t4\taux\t_\t_\t_
3\tisusovi\tisusu\tN\tcase=d\t1\tsub\t_\t_\t_
4\tuzresa\tuzreti\tV\taspect=pfv\t0\tpred\t_\t_\t_

# sent_id = s07
1\tsutvorilu\tsutvoriti\tV\taspect=pfv\t0\tpred\t_\t_\t_
2\tcudo\tcudo\tN\tcase=a\t1\tobj\t_\t_\t_
3\tzurestiimu\tzureti\tV\tmood=ptcp|aspect=ipfv|case=d\t1\tadv\t_\t_\t_

# sent_id = s08
1\tpride\tpriti\tV\taspect=pfv\t0\tpred\t_\t_\t_
2\tpozde\tpozde\tD\t_\t3\tadv\t_\t_\t_
3\tbyvusju\tbyti\tV\tmood=ptcp|aspect=pfv|case=d\t1\tadv\t_\t_\t_

# sent_id = s09
1\tprisedusju\tprijti\tV\tmood=ptcp|aspect=pfv|case=d\t4\tadv\t_\t_\t_
2\temu\ti\tP\tcase=d\t1\tsub\t_\t_\t_
3\ti\ti\tC\t_\t5\taux\t_\t_\t_
4\t_\t_\tV\t_\t5\tadv\t_\tempty\t_
5\trece\tresti\tV\taspect=pfv\t0\tpred\t_\t_\t_

# sent_id = s10
1\tjegda\tjegda\tG\t_\t2\taux\t_\t_\t_
2\tpride\tpriti\tV\taspect=pfv\t4\tadv\t_\t_\t_
3\tisu\tisusu\tN\tcase=n\t2\tsub\t_\t_\t_
4\tuzresa\tuzreti\tV\taspect=pfv\t0\tpred\t_\t_\t_

# sent_id = s11
1\tpride\tpriti\tV\taspect=pfv\t0\tpred\t_\t_\t_
2\tgodu\tgodu\tN\tcase=n\t1\tobj\t_\t_\t_
3\tjegda\tjegda\tG\t_\t4\taux\t_\t_\t_
4\tviditu\tvideti\tV\taspect=ipfv\t2\tatr\t_\t_\t_

# sent_id = s12
1\tjegda\tjegda\tG\t_\t2\taux\t_\t_\t_
2\tslysitu\tslysati\tV\taspect=ipfv\t3\tadv\t_\t_\t_
3\ti\ti\tC\t_\t6\tadv\t_\t_\t_
4\tjegda\tjegda\tG\t_\t5\taux\t_\t_\t_
5\tviditu\tvideti\tV\taspect=ipfv\t3\tadv\t_\t_\t_
6\traduetu\tradovati\tV\taspect=ipfv\t0\tpred\t_\t_\t_
"""

# (sentence, kind, trigger, matrix, position, subject, subject_position,
#  aspect, required flags)
EXPECTED = [
    ("s01", "conjunct", 1, 3, "pre", "overt", "VS", "pfv", set()),
    ("s02", "conjunct", 1, 2, "pre", "null", None, "pfv", set()),
    ("s03", "conjunct", 2, 6, "pre", "overt", "VS", "pfv", set()),
    ("s04", "conjunct", 1, 5, "pre", "null", None, "pfv", set()),
    ("s04", "conjunct", 3, 5, "pre", "null", None, "pfv", set()),
    ("s05", "absolute", 2, 4, "pre", "overt", "SV", "ipfv", set()),
    ("s06", "absolute", 1, 4, "pre", "overt", "VS", "pfv", set()),
    # s07: nominalized post-matrix dative participle, extracted as nothing
    ("s08", "absolute", 3, 1, "post", "impersonal", None, "pfv", set()),
    ("s09", "absolute", 1, 4, "pre", "overt", "VS", "pfv", {"non-canonical"}),
    ("s10", "jegda", 1, 4, "pre", "overt", "VS", "pfv", set()),
    # s11: jegda-clause under atr, excluded
    ("s12", "jegda", 1, 6, "pre", "null", None, "ipfv", set()),
    ("s12", "jegda", 4, 6, "pre", "null", None, "ipfv", set()),
]

"""Sweep two deformation families and print their diagnostic tables.

The first family perturbs the flat torus inside its Aeppli class with a
parameter t, so the torsion norm vanishes linearly as t -> 0 and every row
stays feasible.  The second deforms the torus complex structure into the
Iwasawa one; cohomology dimensions jump and the rows are flagged.
"""

from hstorsion.deform import family_diagnostics, parse_family

SMOOTH = """kind spectral
n 3
modes axis K 1
potential 1 0 0 0 0 0 u 2 := poly(0, 0.08)
potential 0 1 0 0 0 0 u 3 := poly(0, 0.06+0.04i)
t_samples := 0 0.125 0.25 0.5
"""

JUMPING = """kind invariant
n 3
d 3 := poly(0, -1) * e(1,2)
t_samples := 0 0.5 1
"""


def main():
    print("== smooth potential family")
    table = family_diagnostics(parse_family(SMOOTH))
    print(table)
    print(f"flagged: {table.flagged or 'none'}")

    print("\n== structure-constant family (torus -> iwasawa)")
    table = family_diagnostics(parse_family(JUMPING))
    print(table)
    print(f"flagged: {table.flagged or 'none'}")


if __name__ == "__main__":
    main()

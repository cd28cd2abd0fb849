"""
Certifying a slice
==================

Emit a certificate for the worked example, check it, then tamper with it.
"""

from dslicer import check_certificate, emit_certificate, load_p1, parse_certificate, slice_program

program, config = load_p1()
result = slice_program(program, config)
cert = emit_certificate(program, result.graph, result.marking)
text = cert.to_text()
print(text)

verdict = check_certificate(program, parse_certificate(text), config)
print("valid:", verdict.valid, verdict.info)

# Dropping the forward mark on a field makes the closure fail at its incoming edge.
forged = parse_certificate(text.replace("F:C.v1 ±", "F:C.v1 -"))
for v in check_certificate(program, forged, config).violations:
    print("  ", v)

# Hiding the edge that stores into v2 is caught by re-translation.
forged = parse_certificate(text.replace("L:C.m4.v -> F:C.v2\n", ""))
for v in check_certificate(program, forged, config).violations:
    print("  ", v)

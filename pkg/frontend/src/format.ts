// Number formatting that reproduces the engine's JSON byte-for-byte.
//
// The API serialises floats with CPython's repr (shortest round-trip
// digits, positional notation for decimal exponents in [-4, 16), otherwise
// scientific with a signed, >=2-digit exponent, and a trailing ".0" on
// integral floats).  JavaScript's String() uses different cut-offs and
// unpadded exponents, so displayed values would not match the payload
// text.  Every number shown in the UI goes through one of these two
// functions; both are pure.

export function formatCount(x: number): string {
  return String(x);
}

export function formatMeasure(x: number): string {
  if (!Number.isFinite(x)) return String(x);
  if (x === 0) return Object.is(x, -0) ? "-0.0" : "0.0";
  const neg = x < 0 ? "-" : "";
  // shortest-round-trip digits in exponential form: "d[.ddd]e±k"
  const [mant, expStr] = Math.abs(x).toExponential().split("e");
  const digits = mant.replace(".", "");
  const e = parseInt(expStr, 10);
  if (e < -4 || e >= 16) {
    const mantissa = digits.length > 1 ? `${digits[0]}.${digits.slice(1)}` : digits;
    const sign = e < 0 ? "-" : "+";
    const mag = String(Math.abs(e)).padStart(2, "0");
    return `${neg}${mantissa}e${sign}${mag}`;
  }
  if (e >= 0) {
    if (e + 1 >= digits.length) {
      return `${neg}${digits.padEnd(e + 1, "0")}.0`;
    }
    return `${neg}${digits.slice(0, e + 1)}.${digits.slice(e + 1)}`;
  }
  return `${neg}0.${"0".repeat(-e - 1)}${digits}`;
}

export function formatPercent(x: number, places = 1): string {
  return `${(100 * x).toFixed(places)}%`;
}

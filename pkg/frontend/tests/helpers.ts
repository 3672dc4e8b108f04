import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const HERE = dirname(fileURLToPath(import.meta.url));

export function fixtureText(name: string): string {
  return readFileSync(join(HERE, "fixtures", name), "utf8");
}

export function fixture<T>(name: string): T {
  return JSON.parse(fixtureText(name)) as T;
}

/** Ordered number literals of a JSON document, skipping string contents. */
export function numberLiterals(text: string): string[] {
  const out: string[] = [];
  let i = 0;
  while (i < text.length) {
    const c = text[i];
    if (c === '"') {
      i += 1;
      while (i < text.length && text[i] !== '"') {
        if (text[i] === "\\") i += 1;
        i += 1;
      }
      i += 1;
      continue;
    }
    if (c === "-" || (c >= "0" && c <= "9")) {
      const m = /^-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?/.exec(text.slice(i));
      if (m) {
        out.push(m[0]);
        i += m[0].length;
        continue;
      }
    }
    i += 1;
  }
  return out;
}

/** Numbers of a parsed JSON document in document order. */
export function numberValues(node: unknown): number[] {
  if (typeof node === "number") return [node];
  if (Array.isArray(node)) return node.flatMap(numberValues);
  if (node !== null && typeof node === "object") {
    return Object.values(node as Record<string, unknown>).flatMap(numberValues);
  }
  return [];
}

/** Raw literal text of a top-level-ish scalar field, e.g. `"p0": 1.2e-09`. */
export function rawLiteral(text: string, key: string): string {
  const m = new RegExp(`"${key}": ([^,\\n}]+)`).exec(text);
  if (!m) throw new Error(`field ${key} not found in fixture`);
  return m[1].trim();
}

export function jsonResponse(body: unknown, status = 200): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: async () => body,
  } as unknown as Response;
}

export function envelope<T>(result: T) {
  return {
    engine_version: "0.1.0",
    elapsed_ms: 1.0,
    warnings: [] as string[],
    result,
  };
}

import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import { fmt } from '../src/format.js';

const here = dirname(fileURLToPath(import.meta.url));

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(here, 'fixtures', name), 'utf-8')) as T;
}

export function svgElement(): SVGSVGElement {
  return document.createElementNS('http://www.w3.org/2000/svg', 'svg') as SVGSVGElement;
}

/** Every formatted number reachable in a response payload. */
export function allowedNumbers(payload: unknown, set = new Set<string>()): Set<string> {
  if (typeof payload === 'number') {
    set.add(fmt(payload));
  } else if (Array.isArray(payload)) {
    for (const item of payload) allowedNumbers(item, set);
  } else if (payload && typeof payload === 'object') {
    for (const value of Object.values(payload)) allowedNumbers(value, set);
  }
  return set;
}

/** Numeric-looking tokens from all text nodes under a root element. */
export function numericTokens(root: Element): string[] {
  const out: string[] = [];
  const walk = (node: Node) => {
    if (node.nodeType === 3 && node.textContent) {
      for (const token of node.textContent.split(/[\s=|()—,:\/]+/)) {
        if (token && Number.isFinite(Number(token))) out.push(token);
      }
    }
    node.childNodes.forEach(walk);
  };
  walk(root);
  return out;
}

type Route = { pattern: RegExp; payload: unknown };

/** fetch stand-in serving fixture payloads and counting requests. */
export class FakeFetch {
  calls: string[] = [];
  private routes: Route[] = [];

  on(pattern: RegExp, payload: unknown): this {
    this.routes.push({ pattern, payload });
    return this;
  }

  count(pattern: RegExp): number {
    return this.calls.filter((url) => pattern.test(url)).length;
  }

  fetch = async (url: string, _init?: RequestInit): Promise<Response> => {
    this.calls.push(url);
    for (const route of this.routes) {
      if (route.pattern.test(url)) {
        return new Response(JSON.stringify(route.payload), {
          status: 200,
          headers: { 'content-type': 'application/json' },
        });
      }
    }
    return new Response(
      JSON.stringify({ error: { code: 'NOT_FOUND', message: `no route: ${url}` } }),
      { status: 404 },
    );
  };
}

/** Static host for the workbench page plus a verbatim /v1 proxy.
 *
 * The browser keeps same-origin requests and the triage service stays the
 * only writer: every /v1 call is forwarded unchanged to the upstream service
 * and the response is returned as-is. Everything else is a fixed set of
 * static files, no directory listing, no path traversal.
 */

import http from "node:http";
import { readFile } from "node:fs/promises";
import path from "node:path";
import process from "node:process";
import { fileURLToPath } from "node:url";

export interface UiServerOptions {
  /** Directory holding index.html, styles.css, and dist/. */
  root: string;
  /** Upstream triage service origin, e.g. http://127.0.0.1:8000. */
  target: string;
}

const CONTENT_TYPES: Record<string, string> = {
  ".html": "text/html; charset=utf-8",
  ".css": "text/css; charset=utf-8",
  ".js": "text/javascript; charset=utf-8",
};

function jsonResponse(res: http.ServerResponse, status: number, body: unknown): void {
  const text = JSON.stringify(body);
  res.writeHead(status, { "content-type": "application/json" });
  res.end(text);
}

function staticPath(root: string, urlPath: string): string | null {
  if (urlPath === "/") return path.join(root, "index.html");
  if (urlPath === "/styles.css") return path.join(root, "styles.css");
  const match = /^\/app\/([A-Za-z0-9_.-]+\.js)$/.exec(urlPath);
  if (match !== null && !match[1].includes("..")) {
    return path.join(root, "dist", match[1]);
  }
  return null;
}

async function readBody(req: http.IncomingMessage): Promise<Buffer> {
  const chunks: Buffer[] = [];
  for await (const chunk of req) chunks.push(chunk as Buffer);
  return Buffer.concat(chunks);
}

async function proxy(
  target: string,
  req: http.IncomingMessage,
  res: http.ServerResponse,
): Promise<void> {
  const method = req.method ?? "GET";
  // Copy into a plain Uint8Array: fetch's BodyInit does not take a Buffer.
  const body =
    method === "GET" || method === "HEAD" ? undefined : new Uint8Array(await readBody(req));
  let upstream: Response;
  try {
    upstream = await fetch(target + (req.url ?? "/"), {
      method,
      headers: { "content-type": req.headers["content-type"] ?? "application/json" },
      body,
    });
  } catch (err) {
    jsonResponse(res, 502, {
      error: "upstream_unreachable",
      detail: err instanceof Error ? err.message : String(err),
    });
    return;
  }
  const text = await upstream.text();
  res.writeHead(upstream.status, {
    "content-type": upstream.headers.get("content-type") ?? "application/json",
  });
  res.end(text);
}

export function createUiServer(options: UiServerOptions): http.Server {
  const root = path.resolve(options.root);
  const target = options.target.replace(/\/$/, "");

  return http.createServer((req, res) => {
    void (async () => {
      const urlPath = (req.url ?? "/").split("?")[0];
      if (urlPath.startsWith("/v1/")) {
        await proxy(target, req, res);
        return;
      }
      const file = staticPath(root, urlPath);
      if (file === null) {
        jsonResponse(res, 404, { error: "not_found", detail: `no route for ${urlPath}` });
        return;
      }
      try {
        const content = await readFile(file);
        res.writeHead(200, {
          "content-type": CONTENT_TYPES[path.extname(file)] ?? "application/octet-stream",
        });
        res.end(content);
      } catch {
        jsonResponse(res, 404, { error: "not_found", detail: `no route for ${urlPath}` });
      }
    })();
  });
}

export function startUiServer(
  options: UiServerOptions & { port?: number; host?: string },
): Promise<{ server: http.Server; port: number }> {
  const server = createUiServer(options);
  const host = options.host ?? "127.0.0.1";
  return new Promise((resolve, reject) => {
    server.once("error", reject);
    server.listen(options.port ?? 0, host, () => {
      const address = server.address();
      if (address === null || typeof address === "string") {
        reject(new Error("could not determine listen port"));
        return;
      }
      resolve({ server, port: address.port });
    });
  });
}

const isMain =
  process.argv[1] !== undefined &&
  fileURLToPath(import.meta.url) === path.resolve(process.argv[1]);

if (isMain) {
  const target = process.env.LITSCREEN_API ?? "http://127.0.0.1:8000";
  const port = Number.parseInt(process.env.UI_PORT ?? "5173", 10);
  const root = path.resolve(fileURLToPath(new URL(".", import.meta.url)), "..");
  void startUiServer({ root, target, port }).then(({ port: bound }) => {
    console.log(`triage-ui on http://127.0.0.1:${bound} -> ${target}`);
  });
}

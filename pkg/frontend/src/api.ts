/**
 * Typed client for the gateway HTTP API. The console talks to nothing else.
 *
 * The event stream is parsed from fetch's byte stream rather than
 * EventSource so the same code runs in the browser and under node tests.
 */

export type StreamEvent = {
  type: string;
  request_id: string;
  payload: Record<string, unknown>;
};

export type TraceRecord = {
  seq: number;
  tick: number;
  request_id: string;
  actor: string;
  action: string;
  detail: string;
};

export type TraceResponse = {
  request_id: string;
  records: TraceRecord[];
  agents_involved: string[];
};

export type AgoraExport = {
  agora_id: string;
  participants: string[];
  entries: { author: string; stage: number; round: number; content: string }[];
  published: string[][] | null;
};

export class GatewayError extends Error {
  constructor(
    public readonly code: string,
    public readonly detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

async function jsonOrThrow<T>(response: Response): Promise<T> {
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    const err = body as { code?: string; detail?: string };
    throw new GatewayError(err.code ?? `HTTP${response.status}`, err.detail ?? "");
  }
  return body as T;
}

export class GatewayClient {
  constructor(private readonly baseUrl: string) {}

  async createSession(attrs: Record<string, string>): Promise<string> {
    const response = await fetch(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ attrs }),
    });
    const body = await jsonOrThrow<{ session_id: string }>(response);
    return body.session_id;
  }

  async postMessage(sessionId: string, text: string): Promise<string> {
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}/messages`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ text }),
    });
    const body = await jsonOrThrow<{ request_id: string }>(response);
    return body.request_id;
  }

  async postIntegration(
    sessionId: string,
    requestId: string,
    text: string,
  ): Promise<void> {
    const response = await fetch(
      `${this.baseUrl}/sessions/${sessionId}/integrations`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ request_id: requestId, text }),
      },
    );
    await jsonOrThrow<{ accepted: boolean }>(response);
  }

  async getTrace(sessionId: string, requestId: string): Promise<TraceResponse> {
    const response = await fetch(
      `${this.baseUrl}/sessions/${sessionId}/trace?request=${encodeURIComponent(requestId)}`,
    );
    return jsonOrThrow<TraceResponse>(response);
  }

  async getAgora(sessionId: string, agoraId: string): Promise<AgoraExport> {
    const response = await fetch(
      `${this.baseUrl}/sessions/${sessionId}/agora/${encodeURIComponent(agoraId)}`,
    );
    return jsonOrThrow<AgoraExport>(response);
  }

  /**
   * Subscribe to the session's event stream. Events arrive in order; the
   * returned function aborts the subscription.
   */
  streamEvents(
    sessionId: string,
    onEvent: (event: StreamEvent) => void,
    onError: (error: Error) => void,
    options?: { once?: boolean; after?: number },
  ): () => void {
    const controller = new AbortController();
    const params = new URLSearchParams();
    if (options?.once) params.set("once", "1");
    if (options?.after) params.set("after", String(options.after));
    const url = `${this.baseUrl}/sessions/${sessionId}/events?${params}`;

    (async () => {
      try {
        const response = await fetch(url, { signal: controller.signal });
        if (!response.ok || !response.body) {
          throw new GatewayError(`HTTP${response.status}`, "stream unavailable");
        }
        const reader = response.body.getReader();
        const decoder = new TextDecoder();
        let buffer = "";
        for (;;) {
          const { value, done } = await reader.read();
          if (done) break;
          buffer += decoder.decode(value, { stream: true });
          let split;
          while ((split = buffer.indexOf("\n\n")) >= 0) {
            const frame = buffer.slice(0, split);
            buffer = buffer.slice(split + 2);
            for (const line of frame.split("\n")) {
              if (line.startsWith("data: ")) {
                onEvent(JSON.parse(line.slice(6)) as StreamEvent);
              }
            }
          }
        }
      } catch (error) {
        if (!controller.signal.aborted) {
          onError(error instanceof Error ? error : new Error(String(error)));
        }
      }
    })();

    return () => controller.abort();
  }
}

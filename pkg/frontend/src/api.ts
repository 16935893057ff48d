/**
 * HTTP client for the dialogue service.
 *
 * Talks only to the documented endpoints: POST /chat for turns,
 * GET /session/{id} for the stored conversation state, GET /health.
 * The session id is generated client-side once and pinned for the
 * lifetime of the tab.
 */

export interface ChatOption {
  doc_id: string;
  title: string;
}

export interface ChatResponse {
  session_id: string;
  reply: string;
  responder_id: string;
  phase: string;
  options: ChatOption[];
  step_index: number | null;
  step_total: number | null;
  ended: boolean;
  degraded: boolean;
}

export class ApiError extends Error {
  constructor(message: string, readonly status?: number) {
    super(message);
    this.name = 'ApiError';
  }
}

/** Random url-safe token, good enough to keep two tabs apart. */
export function newSessionId(random: () => number = Math.random): string {
  const alphabet = 'abcdefghijklmnopqrstuvwxyz0123456789';
  let token = 'web-';
  for (let i = 0; i < 16; i++) {
    token += alphabet[Math.floor(random() * alphabet.length)];
  }
  return token;
}

export class ChatClient {
  constructor(
    private readonly baseUrl: string,
    readonly sessionId: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  /** POST one utterance; every user action maps to exactly one call here. */
  async send(utterance: string): Promise<ChatResponse> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}/chat`, {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({ session_id: this.sessionId, utterance }),
      });
    } catch (err) {
      throw new ApiError(`network failure: ${String(err)}`);
    }
    if (!response.ok) {
      throw new ApiError(`chat request failed (${response.status})`, response.status);
    }
    return (await response.json()) as ChatResponse;
  }

  async sessionState(): Promise<unknown> {
    const response = await this.fetchFn(`${this.baseUrl}/session/${this.sessionId}`);
    if (!response.ok) {
      throw new ApiError(`session lookup failed (${response.status})`, response.status);
    }
    return response.json();
  }
}

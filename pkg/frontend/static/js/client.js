// Service access: plain fetch wrappers plus a reconnecting event stream.
// Both take their transports as parameters so tests can run under node.
export class ServiceError extends Error {
    status;
    constructor(message, status) {
        super(message);
        this.status = status;
    }
}
export class ServiceClient {
    baseUrl;
    fetchImpl;
    constructor(baseUrl, fetchImpl = fetch) {
        this.baseUrl = baseUrl;
        this.fetchImpl = fetchImpl;
    }
    async call(method, path, body) {
        const resp = await this.fetchImpl(this.baseUrl + path, {
            method,
            headers: body === undefined ? undefined : { "Content-Type": "application/json" },
            body: body === undefined ? undefined : JSON.stringify(body),
        });
        const text = await resp.text();
        if (!resp.ok) {
            let detail = text;
            try {
                detail = JSON.parse(text).detail ?? text;
            }
            catch {
                // leave raw body as the message
            }
            throw new ServiceError(String(detail), resp.status);
        }
        return JSON.parse(text);
    }
    getState() {
        return this.call("GET", "/state");
    }
    setMode(mode) {
        return this.call("POST", "/mode", { mode });
    }
    addLabel(name, location) {
        return this.call("POST", "/labels", { name, location });
    }
    capture(payload) {
        return this.call("POST", "/capture", payload);
    }
}
export class EventStream {
    url;
    makeWs;
    hooks;
    ws = null;
    closed = false;
    retryMs = 250;
    constructor(url, makeWs, hooks) {
        this.url = url;
        this.makeWs = makeWs;
        this.hooks = hooks;
    }
    start() {
        this.closed = false;
        this.connect();
    }
    stop() {
        this.closed = true;
        if (this.ws)
            this.ws.close();
        this.ws = null;
    }
    connect() {
        if (this.closed)
            return;
        const ws = this.makeWs(this.url);
        this.ws = ws;
        ws.onopen = () => {
            this.retryMs = 250;
            this.hooks.onConnect();
        };
        ws.onmessage = (ev) => {
            let parsed;
            try {
                parsed = JSON.parse(String(ev.data));
            }
            catch {
                return; // not ours to crash on
            }
            const event = parsed;
            if (event && typeof event.kind === "string") {
                if (event.kind === "hello")
                    return; // server greeting, not a session event
                this.hooks.onEvent(event);
            }
        };
        ws.onerror = () => {
            // onclose follows and owns the retry
        };
        ws.onclose = () => {
            this.ws = null;
            this.hooks.onDisconnect();
            if (!this.closed) {
                const delay = this.retryMs;
                this.retryMs = Math.min(this.retryMs * 2, 4000);
                setTimeout(() => this.connect(), delay);
            }
        };
    }
}
//# sourceMappingURL=client.js.map